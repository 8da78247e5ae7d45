#include "dps/config.hpp"

#include <charconv>
#include <fstream>
#include <set>
#include <sstream>

#include "dps/errors.hpp"

namespace dps {

namespace {

std::string_view trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

// Drops a trailing comment that is not inside a quoted string.
std::string_view strip_comment(std::string_view line) {
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        if (line[i] == '"') quoted = !quoted;
        if (line[i] == '#' && !quoted) return line.substr(0, i);
    }
    return line;
}

class LineError {
public:
    explicit LineError(std::size_t line) : line_(line) {}
    [[noreturn]] void fail(const std::string& message) const {
        throw ConfigError("config line " + std::to_string(line_) + ": " + message);
    }

private:
    std::size_t line_;
};

template <class T>
T parse_integer(std::string_view value, const LineError& where, const std::string& key) {
    T out{};
    const auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
    if (ec != std::errc() || ptr != value.data() + value.size()) {
        where.fail(key + " must be a non-negative integer, got \"" + std::string(value) + "\"");
    }
    return out;
}

double parse_real(std::string_view value, const LineError& where, const std::string& key) {
    double out = 0.0;
    const auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
    if (ec != std::errc() || ptr != value.data() + value.size()) {
        where.fail(key + " must be a number, got \"" + std::string(value) + "\"");
    }
    return out;
}

std::string parse_string(std::string_view value, const LineError& where, const std::string& key) {
    if (value.size() >= 2 && value.front() == '"' && value.back() == '"') {
        return std::string(value.substr(1, value.size() - 2));
    }
    if (value.find_first_of("\"[] ") != std::string_view::npos) {
        where.fail(key + " must be a string, got \"" + std::string(value) + "\"");
    }
    return std::string(value);
}

std::vector<std::size_t> parse_size_array(std::string_view value, const LineError& where, const std::string& key) {
    if (value.size() < 2 || value.front() != '[' || value.back() != ']') {
        where.fail(key + " must be an array like [32, 32]");
    }
    std::vector<std::size_t> out;
    std::string_view body = trim(value.substr(1, value.size() - 2));
    while (!body.empty()) {
        const auto comma = body.find(',');
        out.push_back(parse_integer<std::size_t>(trim(body.substr(0, comma)), where, key));
        if (comma == std::string_view::npos) break;
        body = trim(body.substr(comma + 1));
    }
    return out;
}

}  // namespace

RunConfig parse_config(std::string_view text) {
    RunConfig config;
    SearchConfig& search = config.search();
    std::set<std::string> seen;

    std::size_t line_no = 0;
    std::size_t start = 0;
    while (start <= text.size()) {
        const auto newline = text.find('\n', start);
        const std::string_view raw =
            text.substr(start, newline == std::string_view::npos ? std::string_view::npos : newline - start);
        start = newline == std::string_view::npos ? text.size() + 1 : newline + 1;
        ++line_no;

        const std::string_view line = trim(strip_comment(raw));
        if (line.empty()) continue;
        const LineError where(line_no);
        if (line.front() == '[' && line.back() == ']') where.fail("tables are not supported");
        const auto eq = line.find('=');
        if (eq == std::string_view::npos) where.fail("expected key = value");
        const std::string key(trim(line.substr(0, eq)));
        const std::string_view value = trim(line.substr(eq + 1));
        if (key.empty() || value.empty()) where.fail("expected key = value");
        if (!seen.insert(key).second) where.fail("duplicate key " + key);

        if (key == "env") {
            config.env = parse_string(value, where, key);
        } else if (key == "n_deltas") {
            search.n_deltas = parse_integer<std::size_t>(value, where, key);
        } else if (key == "n_updates") {
            search.n_updates = parse_integer<std::size_t>(value, where, key);
        } else if (key == "alpha_start") {
            search.alpha.start = parse_real(value, where, key);
        } else if (key == "alpha_end") {
            search.alpha.end = parse_real(value, where, key);
        } else if (key == "sigma_start") {
            search.sigma.start = parse_real(value, where, key);
        } else if (key == "sigma_end") {
            search.sigma.end = parse_real(value, where, key);
        } else if (key == "master_seed") {
            search.master_seed = parse_integer<std::uint64_t>(value, where, key);
        } else if (key == "reward_mode") {
            try {
                search.reward_mode = parse_reward_mode(parse_string(value, where, key));
            } catch (const ConfigError& e) {
                where.fail(e.what());
            }
        } else if (key == "mesh_scales") {
            search.mesh.num_scales = parse_integer<std::size_t>(value, where, key);
        } else if (key == "mesh_base") {
            search.mesh.base_scale = parse_real(value, where, key);
        } else if (key == "max_episode_steps") {
            search.max_episode_steps = parse_integer<std::size_t>(value, where, key);
        } else if (key == "hidden_sizes") {
            config.pretrain.hidden_sizes = parse_size_array(value, where, key);
        } else if (key == "normalizer_samples") {
            config.pretrain.normalizer_samples = parse_integer<std::size_t>(value, where, key);
        } else if (key == "quality") {
            try {
                config.pretrain.quality = parse_quality(parse_string(value, where, key));
            } catch (const ConfigError& e) {
                where.fail(e.what());
            }
        } else {
            where.fail("unknown key \"" + key + "\"");
        }
    }
    if (config.env) env_spec_by_name(*config.env);
    search.validate();
    config.pretrain.validate();
    return config;
}

RunConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("config not found: " + path.string());
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return parse_config(buffer.str());
}

}  // namespace dps
