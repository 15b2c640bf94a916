#include "pathroute/prompts.hpp"

namespace pathroute {

namespace {

constexpr std::string_view kPromptU =
    R"(You are a multimodal reasoning model. For this task, you must follow this EXACT reasoning path:

Understanding -> Answer

Where:
- Understanding = Text Understanding: give exactly one sentence that directly describes the visible input and the task, without inference
- Answer = Final Answer: answer directly from perception only

Output format:

Understanding:
(Exactly one sentence directly describing the visible input and the task)

Answer:
(Direct answer based only on what is explicitly visible or stated)

Now solve the following query using ONLY this path (Understanding -> Answer):

Query:
<benchmark query>)";

constexpr std::string_view kPromptR =
    R"(You are a multimodal reasoning model. For this task, you must follow this EXACT reasoning path:

Understanding -> Reasoning -> Answer

Where:
- Understanding = Text Understanding: give exactly one sentence that directly describes the visible input and the task, without inference
- Reasoning = Text Reasoning: give a short textual reasoning chain using only the provided information
- Answer = Final Answer: answer directly and concisely

Output format:

Understanding:
(Exactly one sentence directly describing the visible input and the task)

Reasoning:
(A short textual reasoning chain)

Answer:
(Final answer)

Now solve the following query using ONLY this path (Understanding -> Reasoning -> Answer):

Query:
<benchmark query>)";

constexpr std::string_view kPromptC =
    R"(You are a multimodal reasoning model. For this task, you must follow this EXACT reasoning path:

Understanding -> Reasoning -> Visual -> Reasoning -> Answer

Where:
- Understanding = Text Understanding: give exactly one sentence that directly describes the visible input and the task, without inference
- Reasoning = Text Reasoning: give a short textual reasoning chain using only the provided information
- Visual = Visual Reasoning: describe one intermediate visual construct or visual step
- Answer = Final Answer: answer directly and concisely

Output format:

Understanding:
(Exactly one sentence directly describing the visible input and the task)

Reasoning:
(A short textual reasoning chain)

Visual:
(One intermediate visual construct or visual step)

Reasoning:
(A short textual reasoning chain that uses the visual step)

Answer:
(Final answer)

Now solve the following query using ONLY this path (Understanding -> Reasoning -> Visual -> Reasoning -> Answer):

Query:
<benchmark query>)";

constexpr std::string_view kPromptH =
    R"(You are a multimodal reasoning model. For this task, you must follow this EXACT reasoning path:

Understanding -> Reasoning -> Hypothesis -> Reasoning -> Answer

Where:
- Understanding = Text Understanding: give exactly one sentence that directly describes the visible input and the task, without inference
- Reasoning = Text Reasoning: give a short textual reasoning chain using only the provided information
- Hypothesis = Visual Hypothesis: describe candidate visual states or hypotheses before answering
- Answer = Final Answer: answer directly and concisely

Output format:

Understanding:
(Exactly one sentence directly describing the visible input and the task)

Reasoning:
(A short textual reasoning chain)

Hypothesis:
(Candidate visual states or hypotheses)

Reasoning:
(A short textual reasoning chain that uses the visual hypotheses)

Answer:
(Final answer)

Now solve the following query using ONLY this path (Understanding -> Reasoning -> Hypothesis -> Reasoning -> Answer):

Query:
<benchmark query>)";

}  // namespace

std::string_view prompt_template(Path p) {
    switch (p) {
        case Path::A: return kQueryPlaceholder;
        case Path::U: return kPromptU;
        case Path::R: return kPromptR;
        case Path::C: return kPromptC;
        case Path::H: return kPromptH;
    }
    return {};
}

std::string render_prompt(Path p, std::string_view query) {
    if (p == Path::A) return std::string(query);
    std::string_view tpl = prompt_template(p);
    std::string out;
    out.reserve(tpl.size() + query.size());
    size_t at = tpl.find(kQueryPlaceholder);
    out.append(tpl.substr(0, at));
    out.append(query);
    out.append(tpl.substr(at + kQueryPlaceholder.size()));
    return out;
}

}  // namespace pathroute
