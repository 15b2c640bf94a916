#pragma once

#include <string>
#include <string_view>

#include "pathroute/path_space.hpp"

namespace pathroute {

inline constexpr std::string_view kQueryPlaceholder = "<benchmark query>";

// Execution-time prompt wrapper for a path, with `<benchmark query>` still in
// place. For p_A the template is the placeholder alone (the query passes
// through untouched).
std::string_view prompt_template(Path p);

// Renders the wrapper for `query`. p_A returns the query verbatim; the other
// paths substitute it as the final line of the template. Byte-exact and
// deterministic.
std::string render_prompt(Path p, std::string_view query);

}  // namespace pathroute
