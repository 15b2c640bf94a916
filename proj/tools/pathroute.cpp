// pathroute: coordination-path routing engine and evaluation harness.
//
// Subcommands: gen, train, calibrate, eval, audit, losses. Every command is
// deterministic given its flags (randomness only enters through --seed) and
// writes a .manifest.json sidecar describing inputs and outputs.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "pathroute/audit.hpp"
#include "pathroute/calibration.hpp"
#include "pathroute/errors.hpp"
#include "pathroute/loss_kernels.hpp"
#include "pathroute/manifest.hpp"
#include "pathroute/planner.hpp"
#include "pathroute/records.hpp"
#include "pathroute/reporting.hpp"
#include "pathroute/routing.hpp"
#include "pathroute/synth.hpp"

namespace pr = pathroute;
using nlohmann::json;

namespace {

struct GenArgs {
    std::string preset;
    std::string config_file;
    std::string out;
    uint64_t seed = 0;
    std::optional<size_t> total;
};

int run_gen(const GenArgs& a) {
    pr::SynthConfig config;
    pr::RunManifest manifest;
    manifest.command = "gen";
    if (!a.config_file.empty()) {
        config = pr::read_synth_config(a.config_file);
        config.seed = a.seed;
        if (a.total) {
            const size_t nd = config.domains.size();
            const size_t base = *a.total / nd, rem = *a.total % nd;
            for (size_t d = 0; d < nd; ++d)
                config.records_per_domain[d] = base + (d < rem ? 1 : 0);
        }
        pr::add_input(manifest, a.config_file);
    } else {
        config = pr::preset(a.preset, a.seed, a.total);
    }
    auto records = pr::generate(config);
    pr::write_records(a.out, records);
    pr::write_synth_config(a.out + ".config.json", config);

    manifest.config = json{{"preset", a.preset}, {"seed", a.seed},
                           {"records", records.size()}};
    manifest.outputs = {a.out, a.out + ".config.json"};
    pr::write_manifest(manifest, a.out);
    std::cout << "wrote " << records.size() << " records to " << a.out << "\n";
    return 0;
}

struct TrainArgs {
    std::string records;
    std::string val_records;
    std::string out;
    std::string history;
    pr::TrainConfig config;
};

int run_train(const TrainArgs& a) {
    auto records = pr::read_records(a.records);
    if (records.empty()) throw pr::InvalidInput("no records in " + a.records);
    auto samples = pr::to_labeled_samples(records);

    std::vector<pr::LabeledSample> val;
    if (!a.val_records.empty())
        val = pr::to_labeled_samples(pr::read_records(a.val_records));

    auto result = pr::train(samples, a.config, val);
    pr::save_model(result.model, a.out);

    const std::string history = a.history.empty() ? a.out + ".history.csv" : a.history;
    std::string csv = "epoch,train_loss,val_utility\n";
    for (const auto& e : result.history)
        csv += std::to_string(e.epoch) + ',' + pr::fmt6(e.train_loss) + ',' +
               pr::fmt6(e.val_utility) + '\n';
    pr::write_text_file(history, csv);

    pr::RunManifest manifest;
    manifest.command = "train";
    manifest.config = json{{"learning_rate", a.config.learning_rate},
                           {"batch_size", a.config.batch_size},
                           {"weight_decay", a.config.weight_decay},
                           {"epochs", a.config.epochs},
                           {"seed", a.config.seed},
                           {"validation_fraction", a.config.validation_fraction},
                           {"hidden", a.config.hidden},
                           {"filtered_all_fail", result.filtered_count},
                           {"train_size", result.train_size},
                           {"val_size", result.val_size},
                           {"best_epoch", result.best_epoch},
                           {"best_val_utility", result.best_val_utility}};
    pr::add_input(manifest, a.records);
    if (!a.val_records.empty()) pr::add_input(manifest, a.val_records);
    manifest.outputs = {a.out, history};
    pr::write_manifest(manifest, a.out);

    std::cout << "filtered " << result.filtered_count << " all-fail samples; best epoch "
              << result.best_epoch << " (val utility " << pr::fmt6(result.best_val_utility)
              << ")\n";
    return 0;
}

struct CalibrateArgs {
    std::string records;
    std::string model;
    std::string rules;
    std::string out;
    std::vector<double> temperatures;
    std::vector<double> bias_values;
    std::vector<double> margins;
};

int run_calibrate(const CalibrateArgs& a) {
    auto records = pr::read_records(a.records);
    auto model = pr::load_model(a.model);
    auto rules = pr::read_rules_file(a.rules);

    pr::CalibrationGrid grid;
    if (!a.temperatures.empty()) grid.temperatures = a.temperatures;
    if (!a.bias_values.empty()) grid.bias_values = a.bias_values;
    if (!a.margins.empty()) grid.margins = a.margins;

    auto policy = pr::fit_policy(records, model, rules, grid);
    pr::write_policy_file(a.out, policy);

    pr::RunManifest manifest;
    manifest.command = "calibrate";
    manifest.config = json{{"temperatures", grid.temperatures},
                           {"bias_values", grid.bias_values},
                           {"margins", grid.margins}};
    pr::add_input(manifest, a.records);
    pr::add_input(manifest, a.model);
    pr::add_input(manifest, a.rules);
    manifest.outputs = {a.out};
    pr::write_manifest(manifest, a.out);
    std::cout << "fitted " << policy.policies.size() << " bucket policies to " << a.out << "\n";
    return 0;
}

struct EvalArgs {
    std::string records;
    std::string out;  // prefix
    std::vector<std::string> policy_specs;
    std::string model;
    std::optional<uint64_t> seed;
};

pr::RoutingPolicy build_policy(const std::string& spec, const EvalArgs& a,
                               std::shared_ptr<const pr::PlannerModel>& model,
                               pr::RunManifest& manifest) {
    auto need_model = [&]() -> std::shared_ptr<const pr::PlannerModel> {
        if (!model) {
            if (a.model.empty())
                throw pr::InvalidInput("policy '" + spec + "' needs --model");
            model = std::make_shared<pr::PlannerModel>(pr::load_model(a.model));
            pr::add_input(manifest, a.model);
        }
        return model;
    };
    const size_t colon = spec.find(':');
    const std::string kind = spec.substr(0, colon);
    const std::string arg = colon == std::string::npos ? "" : spec.substr(colon + 1);
    if (kind == "fixed") {
        auto p = pr::parse_path(arg);
        if (!p) throw pr::InvalidInput("fixed policy needs a path, e.g. fixed:p_A");
        return pr::FixedPolicy{*p};
    }
    if (kind == "random") {
        if (!arg.empty()) return pr::RandomPolicy{std::stoull(arg)};
        if (!a.seed) throw pr::InvalidInput("random policy needs a seed (random:SEED or --seed)");
        return pr::RandomPolicy{*a.seed};
    }
    if (kind == "model") return pr::ModelOnlyPolicy{need_model()};
    if (kind == "bucket") {
        if (arg.empty()) throw pr::InvalidInput("bucket policy needs a rules file: bucket:FILE");
        pr::BucketOnlyPolicy pol;
        pol.rules = pr::read_rules_file(arg);
        pol.bucket_paths = pr::read_bucket_paths(arg);
        pr::add_input(manifest, arg);
        return pol;
    }
    if (kind == "calibrated") {
        if (arg.empty())
            throw pr::InvalidInput("calibrated policy needs a policy file: calibrated:FILE");
        pr::CalibratedPolicy pol{need_model(), pr::read_policy_file(arg)};
        pr::add_input(manifest, arg);
        return pol;
    }
    if (kind == "oracle") return pr::OraclePolicy{};
    if (kind == "external") return pr::ExternalPolicy{};
    throw pr::InvalidInput("unknown policy kind '" + kind +
                           "' (fixed, random, model, bucket, calibrated, oracle, external)");
}

int run_eval(const EvalArgs& a) {
    auto records = pr::read_records(a.records);
    if (records.empty()) throw pr::InvalidInput("no records in " + a.records);

    pr::RunManifest manifest;
    manifest.command = "eval";
    pr::add_input(manifest, a.records);

    std::vector<std::pair<std::string, std::string>> specs;  // label, spec
    if (a.policy_specs.empty()) {
        for (pr::Path p : pr::all_paths()) {
            const std::string name(pr::path_name(p));
            specs.emplace_back(name, "fixed:" + name);
        }
        if (a.seed) specs.emplace_back("random", "random");
        specs.emplace_back("oracle", "oracle");
    } else {
        for (const auto& raw : a.policy_specs) {
            const size_t eq = raw.find('=');
            if (eq == std::string::npos)
                specs.emplace_back(raw, raw);
            else
                specs.emplace_back(raw.substr(0, eq), raw.substr(eq + 1));
        }
    }

    std::shared_ptr<const pr::PlannerModel> model;
    std::vector<pr::LabeledReport> reports;
    for (const auto& [label, spec] : specs) {
        pr::RoutingPolicy policy = build_policy(spec, a, model, manifest);
        reports.push_back({label, pr::evaluate(policy, records)});
    }

    const std::string grid_csv = a.out + "_grid.csv";
    const std::string dist_csv = a.out + "_distribution.csv";
    const std::string cond_csv = a.out + "_conditional.csv";
    const std::string scat_csv = a.out + "_scatter.csv";
    const std::string bundle = a.out + ".json";
    pr::write_text_file(grid_csv, pr::ablation_grid_csv(reports));
    pr::write_text_file(dist_csv, pr::distribution_csv(reports));
    pr::write_text_file(cond_csv, pr::conditional_csv(reports));
    pr::write_text_file(scat_csv, pr::scatter_csv(reports));
    pr::write_text_file(bundle, pr::eval_bundle_json(reports).dump(2) + "\n");

    json cfg = json::array();
    for (const auto& [label, spec] : specs) cfg.push_back(json{{"label", label}, {"spec", spec}});
    manifest.config = json{{"policies", cfg}};
    if (a.seed) manifest.config["seed"] = *a.seed;
    manifest.outputs = {grid_csv, dist_csv, cond_csv, scat_csv, bundle};
    pr::write_manifest(manifest, bundle);

    std::cout << pr::ablation_grid_csv(reports);
    return 0;
}

struct AuditArgs {
    std::string outputs;
    std::string mode = "mc";
    std::string out;  // prefix
};

int run_audit(const AuditArgs& a) {
    auto rows = pr::read_audit_rows(a.outputs);
    const pr::AnswerMode mode = a.mode == "open" ? pr::AnswerMode::Open
                                                 : pr::AnswerMode::MultipleChoice;
    if (a.mode != "open" && a.mode != "mc")
        throw pr::InvalidInput("--mode must be 'mc' or 'open'");
    auto table = pr::audit_corpus(rows, mode);

    const std::string csv = a.out + ".csv";
    const std::string js = a.out + ".json";
    pr::write_text_file(csv, pr::compliance_csv(table));
    pr::write_text_file(js, pr::compliance_json(table).dump(2) + "\n");

    pr::RunManifest manifest;
    manifest.command = "audit";
    manifest.config = json{{"mode", a.mode}};
    pr::add_input(manifest, a.outputs);
    manifest.outputs = {csv, js};
    pr::write_manifest(manifest, csv);

    std::cout << pr::compliance_csv(table);
    return 0;
}

struct LossesArgs {
    std::string inputs;
    std::string stage = "S1";
    std::string head_file;
    std::string out;
};

pr::ProjectionHead read_head(const std::string& file) {
    std::ifstream in(file);
    if (!in) throw pr::IoError("cannot open " + file);
    json j = json::parse(in, nullptr, false);
    if (j.is_discarded()) throw pr::InvalidInput(file + ": not valid JSON");
    try {
        const auto& w = j.at("weight");
        const auto rows = w.at("rows").get<Eigen::Index>();
        const auto cols = w.at("cols").get<Eigen::Index>();
        auto flat = w.at("data").get<std::vector<double>>();
        if (static_cast<Eigen::Index>(flat.size()) != rows * cols)
            throw pr::InvalidInput(file + ": weight size mismatch");
        pr::ProjectionHead head;
        head.weight.resize(rows, cols);
        size_t at = 0;
        for (Eigen::Index r = 0; r < rows; ++r)
            for (Eigen::Index c = 0; c < cols; ++c) head.weight(r, c) = flat[at++];
        auto b = j.at("bias").get<std::vector<double>>();
        head.bias = Eigen::Map<Eigen::VectorXd>(b.data(), static_cast<Eigen::Index>(b.size()));
        return head;
    } catch (const json::exception& e) {
        throw pr::InvalidInput(file + ": head schema violation: " + e.what());
    }
}

int run_losses(const LossesArgs& a) {
    const pr::StageConfig stage = pr::stage_preset(a.stage);
    auto inputs = pr::read_loss_inputs(a.inputs);
    std::optional<pr::ProjectionHead> head;
    if (!a.head_file.empty()) head = read_head(a.head_file);

    std::string csv = "id,L_text,L_vis,L_latent,L_exec\n";
    for (const auto& li : inputs) {
        std::optional<double> text, vis;
        if (li.stream) text = pr::text_loss(*li.stream, pr::build_loss_mask(*li.stream, stage));
        if (!li.spans.empty()) {
            pr::ProjectionHead h = head ? *head
                                        : pr::identity_head(static_cast<int>(li.spans[0].target.size()));
            vis = pr::visual_loss(li.spans, h);
        }
        const double total = pr::exec_loss(text, li.latent, vis, stage);
        csv += li.id;
        csv += ',';
        csv += text ? pr::fmt6(*text) : "";
        csv += ',';
        csv += vis ? pr::fmt6(*vis) : "";
        csv += ',';
        csv += li.latent ? pr::fmt6(*li.latent) : "";
        csv += ',' + pr::fmt6(total) + '\n';
    }
    pr::write_text_file(a.out, csv);

    pr::RunManifest manifest;
    manifest.command = "losses";
    manifest.config = json{{"stage", a.stage}};
    pr::add_input(manifest, a.inputs);
    if (!a.head_file.empty()) pr::add_input(manifest, a.head_file);
    manifest.outputs = {a.out};
    pr::write_manifest(manifest, a.out);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"coordination-path routing engine and evaluation harness"};
    app.require_subcommand(1);

    GenArgs gen;
    auto* cgen = app.add_subcommand("gen", "generate a synthetic path-outcome corpus");
    auto* preset_opt = cgen->add_option("--preset", gen.preset, "scenario preset");
    auto* config_opt = cgen->add_option("--config", gen.config_file, "synth config JSON");
    preset_opt->excludes(config_opt);
    cgen->add_option("--n", [&gen](const CLI::results_t& r) {
        gen.total = std::stoull(r[0]);
        return true;
    }, "total record count override");
    cgen->add_option("--seed", gen.seed, "generation seed")->required();
    cgen->add_option("--out", gen.out, "output records JSONL")->required();

    TrainArgs train;
    auto* ctrain = app.add_subcommand("train", "train the path-scoring planner");
    ctrain->add_option("--records", train.records, "training records JSONL")->required();
    ctrain->add_option("--val-records", train.val_records, "explicit validation records");
    ctrain->add_option("--out", train.out, "output model JSON")->required();
    ctrain->add_option("--history", train.history, "history CSV (default <out>.history.csv)");
    ctrain->add_option("--seed", train.config.seed, "training seed")->required();
    ctrain->add_option("--lr", train.config.learning_rate, "learning rate");
    ctrain->add_option("--batch", train.config.batch_size, "batch size");
    ctrain->add_option("--decay", train.config.weight_decay, "weight decay");
    ctrain->add_option("--epochs", train.config.epochs, "epochs");
    ctrain->add_option("--val-fraction", train.config.validation_fraction,
                       "id-hash validation fraction");
    ctrain->add_option("--hidden", train.config.hidden, "hidden width");

    CalibrateArgs cal;
    auto* ccal = app.add_subcommand("calibrate", "grid-fit per-bucket calibration policies");
    ccal->add_option("--records", cal.records, "calibration records JSONL")->required();
    ccal->add_option("--model", cal.model, "planner model JSON")->required();
    ccal->add_option("--rules", cal.rules, "bucket rules file")->required();
    ccal->add_option("--out", cal.out, "output policy JSON")->required();
    ccal->add_option("--temperatures", cal.temperatures, "temperature grid");
    ccal->add_option("--bias-values", cal.bias_values, "bias value grid");
    ccal->add_option("--margins", cal.margins, "margin grid");

    EvalArgs eval;
    auto* ceval = app.add_subcommand("eval", "run the routing-policy ablation grid");
    ceval->add_option("--records", eval.records, "records JSONL")->required();
    ceval->add_option("--out", eval.out, "output prefix")->required();
    ceval->add_option("--policy", eval.policy_specs,
                      "policy spec label=kind[:arg]; repeatable");
    ceval->add_option("--model", eval.model, "planner model for model/calibrated policies");
    ceval->add_option("--seed", [&eval](const CLI::results_t& r) {
        eval.seed = std::stoull(r[0]);
        return true;
    }, "seed for the random policy");

    AuditArgs audit;
    auto* caudit = app.add_subcommand("audit", "path-format compliance table");
    caudit->add_option("--outputs", audit.outputs, "audited outputs JSONL")->required();
    caudit->add_option("--mode", audit.mode, "answer mode: mc or open");
    caudit->add_option("--out", audit.out, "output prefix")->required();

    LossesArgs losses;
    auto* closs = app.add_subcommand("losses", "executor loss kernels over token files");
    closs->add_option("--inputs", losses.inputs, "loss inputs JSONL")->required();
    closs->add_option("--stage", losses.stage, "stage preset S1..S4");
    closs->add_option("--head", losses.head_file, "projection head JSON");
    closs->add_option("--out", losses.out, "output CSV")->required();

    try {
        app.parse(argc, argv);
        if (cgen->parsed()) {
            if (gen.preset.empty() && gen.config_file.empty())
                throw pr::InvalidInput("gen needs --preset or --config");
            return run_gen(gen);
        }
        if (ctrain->parsed()) return run_train(train);
        if (ccal->parsed()) return run_calibrate(cal);
        if (ceval->parsed()) return run_eval(eval);
        if (caudit->parsed()) return run_audit(audit);
        if (closs->parsed()) return run_losses(losses);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e);
        app.exit(e);
        return 2;
    } catch (const pr::IoError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const pr::InvalidInput& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
