#include "dps/cli.hpp"

#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "dps/checkpoint.hpp"
#include "dps/config.hpp"
#include "dps/envs.hpp"
#include "dps/errors.hpp"
#include "dps/eval.hpp"
#include "dps/meshdim.hpp"
#include "dps/pretrain.hpp"
#include "dps/rollout.hpp"
#include "dps/search.hpp"

namespace dps {

namespace {

using ordered_json = nlohmann::ordered_json;

struct PretrainArgs {
    std::string env;
    std::string config;
    std::string out;
    std::optional<std::uint64_t> seed;
    unsigned workers = 1;
};

struct FinetuneArgs {
    std::string config;
    std::string in;
    std::string out;
    std::string reward_mode;
    std::optional<std::uint64_t> seed;
    std::string history;
    unsigned workers = 1;
};

struct EvalArgs {
    std::string in;
    std::string env;
    std::size_t trials = kDefaultEvalTrials;
    std::uint64_t seed = 0;
    std::string out;
    bool dim = false;
    unsigned workers = 1;
};

struct CompareArgs {
    std::string baseline;
    std::string tuned;
    bool json = false;
};

struct DimArgs {
    std::string trace;
    double base = 0.5;
    double ratio = 0.5;
    std::size_t scales = 4;
};

struct TraceArgs {
    std::string in;
    std::string env;
    std::uint64_t seed = 0;
    std::string out;
};

int cmd_pretrain(const PretrainArgs& args, std::ostream& out) {
    RunConfig config = args.config.empty() ? RunConfig{} : load_config(args.config);
    std::string env = args.env.empty() ? config.env.value_or("") : args.env;
    if (env.empty()) throw ConfigError("pretrain needs --env or an env key in the config");
    env_spec_by_name(env);
    if (args.seed) config.search().master_seed = *args.seed;
    const MlpPolicy policy = pretrain(make_env_factory(env), config.pretrain, args.workers);
    save_checkpoint(policy, args.out);
    out << "wrote " << args.out << " (" << env << ", " << to_string(config.pretrain.quality) << ", |theta| = "
        << policy.parameter_count() << ")\n";
    return kExitOk;
}

int cmd_finetune(const FinetuneArgs& args, std::ostream& out) {
    RunConfig config = load_config(args.config);
    if (!config.env) throw ConfigError("config " + args.config + " has no env key");
    SearchConfig& search = config.search();
    if (!args.reward_mode.empty()) search.reward_mode = parse_reward_mode(args.reward_mode);
    if (args.seed) search.master_seed = *args.seed;
    search.validate();

    const MlpPolicy initial = load_checkpoint(args.in);
    std::optional<std::ofstream> history;
    if (!args.history.empty()) {
        history.emplace(args.history, std::ios::binary | std::ios::trunc);
        if (!*history) throw Error("cannot open " + args.history + " for writing");
    }
    auto on_update = [&](const UpdateRecord& r) {
        if (!history) return;
        ordered_json line = {{"update_index", r.update_index},
                             {"mean_return", r.raw_mean_return},
                             {"sigma_R", r.sigma_R},
                             {"alpha", r.alpha_used},
                             {"sigma", r.sigma_used}};
        *history << line.dump() << '\n';
    };
    const FinetuneResult result = finetune(initial, make_env_factory(*config.env), search, args.workers, on_update);
    save_checkpoint(result.policy, args.out);
    const double last = result.history.empty() ? 0.0 : result.history.back().raw_mean_return;
    out << "wrote " << args.out << " after " << result.history.size() << " updates (last mean return " << last
        << ")\n";
    return kExitOk;
}

int cmd_eval(const EvalArgs& args, std::ostream& out) {
    const EnvFactory make_env = make_env_factory(args.env);
    const MlpPolicy policy = load_checkpoint(args.in);
    EvalOptions options;
    options.n_trials = args.trials;
    options.eval_seed_base = args.seed;
    options.with_dimension = args.dim;
    options.workers = args.workers;
    const EvalReport report = monte_carlo_eval(policy, make_env, options);
    save_report(report, args.out);
    out << render_table(report);
    return kExitOk;
}

int cmd_compare(const CompareArgs& args, std::ostream& out) {
    const ComparisonReport c = compare(load_report(args.baseline), load_report(args.tuned));
    if (args.json) {
        out << to_json(c).dump(2) << '\n';
    } else {
        out << render_table(c);
    }
    return kExitOk;
}

int cmd_dim(const DimArgs& args, std::ostream& out) {
    const std::vector<Vector> trace = read_trace_csv(std::filesystem::path(args.trace));
    const MeshLadder ladder{args.base, args.ratio, args.scales};
    const DimensionEstimate est = estimate_dimension(trace, ladder);
    ordered_json counts = ordered_json::array();
    for (const auto& [scale, count] : est.counts) counts.push_back({scale, count});
    ordered_json doc = {{"lower", est.lower}, {"upper", est.upper}, {"average", est.average}, {"counts", counts}};
    out << doc.dump() << '\n';
    return kExitOk;
}

int cmd_trace(const TraceArgs& args, std::ostream& out) {
    const EnvFactory make_env = make_env_factory(args.env);
    const MlpPolicy policy = load_checkpoint(args.in);
    const RolloutResult r = run_episode(make_env, policy, args.seed, env_spec_by_name(args.env).max_steps, true);
    write_trace_csv(std::filesystem::path(args.out), *r.trace);
    out << "wrote " << args.out << " (" << r.steps << " steps, return " << r.episode_return
        << (r.terminated_early ? ", terminated early" : "") << ")\n";
    return kExitOk;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Direct policy search fine-tuning for deterministic MLP policies", "dps"};
    app.require_subcommand(1);

    PretrainArgs pre;
    auto* pretrain_cmd = app.add_subcommand("pretrain", "Produce an under-trained baseline checkpoint");
    pretrain_cmd->add_option("--env", pre.env, "Environment: mountain_car, pendulum, corridor");
    pretrain_cmd->add_option("--config", pre.config, "Run configuration file")->check(CLI::ExistingFile);
    pretrain_cmd->add_option("--out", pre.out, "Output checkpoint path")->required();
    pretrain_cmd->add_option("--seed", pre.seed, "Master seed (overrides config)");
    pretrain_cmd->add_option("--workers", pre.workers, "Parallel rollout workers")->check(CLI::PositiveNumber);

    FinetuneArgs fine;
    auto* finetune_cmd = app.add_subcommand("finetune", "Fine-tune a checkpoint with direct policy search");
    finetune_cmd->add_option("--config", fine.config, "Run configuration file")->required()->check(CLI::ExistingFile);
    finetune_cmd->add_option("--in", fine.in, "Input checkpoint")->required();
    finetune_cmd->add_option("--out", fine.out, "Output checkpoint")->required();
    finetune_cmd->add_option("--reward-mode", fine.reward_mode, "raw | dim_ratio | dim_product (overrides config)")
        ->check(CLI::IsMember({"raw", "dim_ratio", "dim_product"}));
    finetune_cmd->add_option("--workers", fine.workers, "Parallel rollout workers")->check(CLI::PositiveNumber);
    finetune_cmd->add_option("--seed", fine.seed, "Master seed (overrides config)");
    finetune_cmd->add_option("--history", fine.history, "Write one JSON object per update to this file");

    EvalArgs ev;
    auto* eval_cmd = app.add_subcommand("eval", "Monte-Carlo evaluation of a checkpoint");
    eval_cmd->add_option("--in", ev.in, "Checkpoint")->required();
    eval_cmd->add_option("--env", ev.env, "Environment")->required();
    eval_cmd->add_option("--trials", ev.trials, "Number of trials")->check(CLI::PositiveNumber);
    eval_cmd->add_option("--seed", ev.seed, "Evaluation seed base");
    eval_cmd->add_option("--out", ev.out, "Output JSON report")->required();
    eval_cmd->add_flag("--dim", ev.dim, "Also estimate the mesh dimension of each trial");
    eval_cmd->add_option("--workers", ev.workers, "Parallel rollout workers")->check(CLI::PositiveNumber);

    CompareArgs cmp;
    auto* compare_cmd = app.add_subcommand("compare", "Compare two evaluation reports");
    compare_cmd->add_option("--baseline", cmp.baseline, "Baseline report")->required();
    compare_cmd->add_option("--tuned", cmp.tuned, "Tuned report")->required();
    compare_cmd->add_flag("--json", cmp.json, "Emit JSON instead of a table");

    DimArgs dim;
    auto* dim_cmd = app.add_subcommand("dim", "Mesh dimension of a trace CSV");
    dim_cmd->add_option("--trace", dim.trace, "Trace CSV")->required();
    dim_cmd->add_option("--base", dim.base, "Coarsest cell size");
    dim_cmd->add_option("--ratio", dim.ratio, "Ratio between successive cell sizes");
    dim_cmd->add_option("--scales", dim.scales, "Number of cell sizes");

    TraceArgs tr;
    auto* trace_cmd = app.add_subcommand("trace", "Record one episode's normalized observations as CSV");
    trace_cmd->add_option("--in", tr.in, "Checkpoint")->required();
    trace_cmd->add_option("--env", tr.env, "Environment")->required();
    trace_cmd->add_option("--seed", tr.seed, "Episode seed");
    trace_cmd->add_option("--out", tr.out, "Output CSV")->required();

    try {
        std::vector<std::string> args;
        for (int i = argc - 1; i > 0; --i) args.emplace_back(argv[i]);
        app.parse(args);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kExitOk : kExitUsage;
    }

    try {
        if (*pretrain_cmd) return cmd_pretrain(pre, out);
        if (*finetune_cmd) return cmd_finetune(fine, out);
        if (*eval_cmd) return cmd_eval(ev, out);
        if (*compare_cmd) return cmd_compare(cmp, out);
        if (*dim_cmd) return cmd_dim(dim, out);
        if (*trace_cmd) return cmd_trace(tr, out);
    } catch (const ConfigError& e) {
        err << "error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kExitRuntime;
    }
    return kExitUsage;
}

}  // namespace dps
