#include "dps/rollout.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <exception>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <thread>

#include "dps/checkpoint.hpp"
#include "dps/errors.hpp"

namespace dps {

namespace {

bool finite(std::span<const double> v) {
    return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
}

}  // namespace

RolloutResult run_episode(Environment& env, const MlpPolicy& policy, std::uint64_t seed, std::size_t max_steps,
                          bool record_trace) {
    const EnvSpec& spec = env.spec();
    if (policy.obs_dim() != spec.obs_dim) {
        throw DimensionError("policy input for " + spec.name, spec.obs_dim, policy.obs_dim());
    }
    if (policy.act_dim() != spec.act_dim) {
        throw DimensionError("policy output for " + spec.name, spec.act_dim, policy.act_dim());
    }

    RolloutResult result;
    Vector obs = env.reset(seed);
    if (!finite(obs)) {
        throw RolloutError(spec.name + ": non-finite observation at step 0 (reset, seed " + std::to_string(seed) + ")");
    }
    result.initial_observation = obs;
    if (record_trace) result.trace.emplace();

    while (result.steps < max_steps) {
        Vector normalized = normalize(policy.normalizer(), obs);
        const Vector action = forward_normalized(policy, normalized);
        if (record_trace) result.trace->push_back(std::move(normalized));

        EnvStep step = env.step(action);
        ++result.steps;
        if (!std::isfinite(step.reward)) {
            throw RolloutError(spec.name + ": non-finite reward at step " + std::to_string(result.steps - 1));
        }
        if (!finite(step.observation)) {
            throw RolloutError(spec.name + ": non-finite observation at step " + std::to_string(result.steps - 1));
        }
        result.episode_return += step.reward;
        obs = std::move(step.observation);
        if (step.done) {
            result.terminated_early = step.terminated_early;
            break;
        }
    }
    return result;
}

RolloutResult run_episode(const EnvFactory& make_env, const MlpPolicy& policy, std::uint64_t seed,
                          std::size_t max_steps, bool record_trace) {
    auto env = make_env();
    return run_episode(*env, policy, seed, max_steps, record_trace);
}

void parallel_for(std::size_t n, unsigned workers, const std::function<void(std::size_t)>& fn) {
    if (n == 0) return;
    std::vector<std::exception_ptr> errors(n);
    std::atomic<std::size_t> next{0};
    auto drain = [&] {
        for (std::size_t i = next.fetch_add(1); i < n; i = next.fetch_add(1)) {
            try {
                fn(i);
            } catch (...) {
                errors[i] = std::current_exception();
            }
        }
    };
    const std::size_t thread_count = std::min<std::size_t>(std::max(workers, 1u), n);
    if (thread_count == 1) {
        drain();
    } else {
        std::vector<std::jthread> threads;
        threads.reserve(thread_count - 1);
        for (std::size_t t = 1; t < thread_count; ++t) threads.emplace_back(drain);
        drain();
        threads.clear();  // joins
    }
    for (const auto& error : errors) {
        if (error) std::rethrow_exception(error);
    }
}

PolicyObjective::PolicyObjective(MlpPolicy policy_template, EnvFactory make_env, std::size_t max_steps,
                                 bool record_trace)
    : template_(std::move(policy_template)),
      make_env_(std::move(make_env)),
      max_steps_(max_steps),
      record_trace_(record_trace) {}

RolloutResult PolicyObjective::evaluate(const ParamVector& theta, std::uint64_t seed) const {
    return run_episode(make_env_, unflatten(template_, theta), seed, max_steps_, record_trace_);
}

std::vector<double> PairResults::returns_plus() const {
    std::vector<double> out;
    out.reserve(plus.size());
    for (const auto& r : plus) out.push_back(r.episode_return);
    return out;
}

std::vector<double> PairResults::returns_minus() const {
    std::vector<double> out;
    out.reserve(minus.size());
    for (const auto& r : minus) out.push_back(r.episode_return);
    return out;
}

PairResults evaluate_pairs(const Objective& objective, const ParamVector& theta, std::span<const ParamVector> deltas,
                           std::span<const std::uint64_t> seeds, unsigned workers) {
    if (deltas.size() != seeds.size()) {
        throw DimensionError("evaluate_pairs seeds", deltas.size(), seeds.size());
    }
    for (const ParamVector& delta : deltas) {
        if (delta.size() != theta.size()) throw DimensionError("perturbation", theta.size(), delta.size());
    }
    const std::size_t n = deltas.size();
    PairResults results;
    results.plus.resize(n);
    results.minus.resize(n);

    // Task 2i is theta + delta_i, task 2i+1 is theta - delta_i.
    parallel_for(2 * n, workers, [&](std::size_t task) {
        const std::size_t i = task / 2;
        const bool positive = task % 2 == 0;
        ParamVector candidate = theta;
        const ParamVector& delta = deltas[i];
        for (std::size_t j = 0; j < candidate.size(); ++j) {
            candidate[j] = positive ? theta[j] + delta[j] : theta[j] - delta[j];
        }
        try {
            (positive ? results.plus : results.minus)[i] = objective.evaluate(candidate, seeds[i]);
        } catch (const std::exception& e) {
            throw RolloutError("pair " + std::to_string(i) + (positive ? " (+)" : " (-)") + ": " + e.what());
        }
    });
    return results;
}

void write_trace_csv(std::ostream& out, std::span<const Vector> trace) {
    const std::size_t dim = trace.empty() ? 0 : trace.front().size();
    out << "step";
    for (std::size_t j = 0; j < dim; ++j) out << ",obs_" << j;
    out << '\n';
    for (std::size_t t = 0; t < trace.size(); ++t) {
        if (trace[t].size() != dim) throw DimensionError("trace row " + std::to_string(t), dim, trace[t].size());
        out << t;
        for (double v : trace[t]) out << ',' << format_real(v);
        out << '\n';
    }
}

void write_trace_csv(const std::filesystem::path& path, std::span<const Vector> trace) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot open " + path.string() + " for writing");
    write_trace_csv(out, trace);
}

std::vector<Vector> read_trace_csv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line)) throw Error("trace CSV is empty");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::size_t dim = 0;
    {
        std::istringstream header(line);
        std::string cell;
        std::getline(header, cell, ',');
        if (cell != "step") throw Error("trace CSV header must start with \"step\"");
        while (std::getline(header, cell, ',')) {
            if (cell != "obs_" + std::to_string(dim)) {
                throw Error("trace CSV header: expected obs_" + std::to_string(dim) + ", got \"" + cell + "\"");
            }
            ++dim;
        }
    }
    std::vector<Vector> trace;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::istringstream row(line);
        std::string cell;
        std::getline(row, cell, ',');  // step index
        Vector values;
        while (std::getline(row, cell, ',')) {
            double v = 0.0;
            const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
            if (ec != std::errc() || ptr != cell.data() + cell.size()) {
                throw Error("trace CSV line " + std::to_string(line_no) + ": bad number \"" + cell + "\"");
            }
            values.push_back(v);
        }
        if (values.size() != dim) throw DimensionError("trace CSV line " + std::to_string(line_no), dim, values.size());
        trace.push_back(std::move(values));
    }
    return trace;
}

std::vector<Vector> read_trace_csv(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("trace not found: " + path.string());
    return read_trace_csv(in);
}

}  // namespace dps
