#include "dps/eval.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "dps/errors.hpp"
#include "dps/random.hpp"
#include "dps/rollout.hpp"

namespace dps {

using nlohmann::json;

EvalReport monte_carlo_eval(const MlpPolicy& policy, const EnvFactory& make_env, const EvalOptions& options) {
    if (options.n_trials < 1) throw InvalidArgument("n_trials must be at least 1");
    if (options.with_dimension) options.mesh.validate();

    EvalReport report;
    report.env = make_env()->spec().name;
    report.n_trials = options.n_trials;
    report.per_trial.resize(options.n_trials);

    parallel_for(options.n_trials, options.workers, [&](std::size_t i) {
        TrialOutcome& trial = report.per_trial[i];
        trial.seed = derive_seed(options.eval_seed_base, kEvalNamespace, i);
        const RolloutResult r = run_episode(make_env, policy, trial.seed, options.max_steps, options.with_dimension);
        trial.episode_return = r.episode_return;
        trial.terminated_early = r.terminated_early;
        if (options.with_dimension) trial.dimension = estimate_dimension(*r.trace, options.mesh).average;
    });
    summarize(report);
    return report;
}

void summarize(EvalReport& report) {
    const std::size_t n = report.per_trial.size();
    report.n_trials = n;
    if (n == 0) throw InvalidArgument("evaluation report has no trials");
    double sum = 0.0;
    std::size_t failures = 0;
    double dim_sum = 0.0;
    std::size_t dim_count = 0;
    for (const TrialOutcome& t : report.per_trial) {
        sum += t.episode_return;
        if (t.terminated_early) ++failures;
        if (t.dimension) {
            dim_sum += *t.dimension;
            ++dim_count;
        }
    }
    report.mean_return = sum / static_cast<double>(n);
    double ss = 0.0;
    for (const TrialOutcome& t : report.per_trial) {
        const double d = t.episode_return - report.mean_return;
        ss += d * d;
    }
    report.std_return = n > 1 ? std::sqrt(ss / static_cast<double>(n - 1)) : 0.0;
    report.failure_rate = static_cast<double>(failures) / static_cast<double>(n);
    report.mean_dimension.reset();
    if (dim_count == n) report.mean_dimension = dim_sum / static_cast<double>(n);
}

ComparisonReport compare(const EvalReport& baseline, const EvalReport& tuned) {
    if (baseline.env != tuned.env) {
        throw InvalidArgument("cannot compare reports from different environments (" + baseline.env + " vs " +
                              tuned.env + ")");
    }
    if (baseline.n_trials != tuned.n_trials) {
        throw InvalidArgument("cannot compare reports with different trial counts (" +
                              std::to_string(baseline.n_trials) + " vs " + std::to_string(tuned.n_trials) + ")");
    }
    ComparisonReport c{baseline, tuned, tuned.mean_return - baseline.mean_return,
                       tuned.std_return - baseline.std_return, tuned.failure_rate - baseline.failure_rate, {}};
    if (baseline.mean_dimension && tuned.mean_dimension) {
        c.dimension_delta = *tuned.mean_dimension - *baseline.mean_dimension;
    }
    return c;
}

namespace {

std::string row(const char* label, double mean, double std, double fail_pct, std::optional<double> dim,
                bool signed_values) {
    char buffer[160];
    const char* fmt = signed_values ? "%-10s %+12.2f   %+-10.2f %+9.2f" : "%-10s %12.2f ± %-10.2f %9.2f";
    std::snprintf(buffer, sizeof buffer, fmt, label, mean, std, fail_pct);
    std::string out = buffer;
    if (dim) {
        std::snprintf(buffer, sizeof buffer, signed_values ? " %+8.3f" : " %8.3f", *dim);
        out += buffer;
    }
    return out + "\n";
}

std::string header(const std::string& env, std::size_t trials, bool with_dim) {
    std::string out = "env: " + env + "   trials: " + std::to_string(trials) + "\n";
    char buffer[160];
    std::snprintf(buffer, sizeof buffer, "%-10s %12s   %-10s %9s", "", "Return", "Std", "Fail %");
    out += buffer;
    if (with_dim) out += "     Dim.";
    return out + "\n";
}

}  // namespace

std::string render_table(const EvalReport& report) {
    const bool with_dim = report.mean_dimension.has_value();
    return header(report.env, report.n_trials, with_dim) +
           row("Policy", report.mean_return, report.std_return, 100.0 * report.failure_rate, report.mean_dimension,
               false);
}

std::string render_table(const ComparisonReport& c) {
    const bool with_dim = c.baseline.mean_dimension && c.tuned.mean_dimension;
    std::string out = header(c.baseline.env, c.baseline.n_trials, with_dim);
    out += row("Baseline", c.baseline.mean_return, c.baseline.std_return, 100.0 * c.baseline.failure_rate,
               with_dim ? c.baseline.mean_dimension : std::nullopt, false);
    out += row("Tuned", c.tuned.mean_return, c.tuned.std_return, 100.0 * c.tuned.failure_rate,
               with_dim ? c.tuned.mean_dimension : std::nullopt, false);
    out += row("Delta", c.mean_delta, c.std_delta, 100.0 * c.failure_delta, c.dimension_delta, true);
    return out;
}

json to_json(const EvalReport& report) {
    json trials = json::array();
    for (const TrialOutcome& t : report.per_trial) {
        json item = {{"seed", t.seed}, {"return", t.episode_return}, {"terminated_early", t.terminated_early}};
        if (t.dimension) item["dimension"] = *t.dimension;
        trials.push_back(std::move(item));
    }
    json doc = {{"env", report.env},
                {"n_trials", report.n_trials},
                {"mean_return", report.mean_return},
                {"std_return", report.std_return},
                {"failure_rate", report.failure_rate},
                {"per_trial", std::move(trials)}};
    doc["mean_dimension"] = report.mean_dimension ? json(*report.mean_dimension) : json(nullptr);
    return doc;
}

EvalReport eval_report_from_json(const json& doc) {
    try {
        EvalReport report;
        report.env = doc.at("env").get<std::string>();
        report.n_trials = doc.at("n_trials").get<std::size_t>();
        report.mean_return = doc.at("mean_return").get<double>();
        report.std_return = doc.at("std_return").get<double>();
        report.failure_rate = doc.at("failure_rate").get<double>();
        if (auto it = doc.find("mean_dimension"); it != doc.end() && !it->is_null()) {
            report.mean_dimension = it->get<double>();
        }
        for (const json& item : doc.at("per_trial")) {
            TrialOutcome t;
            t.seed = item.at("seed").get<std::uint64_t>();
            t.episode_return = item.at("return").get<double>();
            t.terminated_early = item.at("terminated_early").get<bool>();
            if (auto it = item.find("dimension"); it != item.end() && !it->is_null()) t.dimension = it->get<double>();
            report.per_trial.push_back(t);
        }
        if (report.per_trial.size() != report.n_trials) {
            throw Error("report n_trials does not match per_trial length");
        }
        return report;
    } catch (const json::exception& e) {
        throw Error(std::string("malformed evaluation report: ") + e.what());
    }
}

json to_json(const ComparisonReport& c) {
    json doc = {{"baseline", to_json(c.baseline)},
                {"tuned", to_json(c.tuned)},
                {"mean_delta", c.mean_delta},
                {"std_delta", c.std_delta},
                {"failure_delta", c.failure_delta}};
    doc["dimension_delta"] = c.dimension_delta ? json(*c.dimension_delta) : json(nullptr);
    return doc;
}

void save_report(const EvalReport& report, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot open " + path.string() + " for writing");
    out << to_json(report).dump(2) << '\n';
}

EvalReport load_report(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("report not found: " + path.string());
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::exception& e) {
        throw Error("report " + path.string() + " is not valid JSON: " + e.what());
    }
    return eval_report_from_json(doc);
}

}  // namespace dps
