#include "tcfp/config.hpp"

#include "tcfp/errors.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <functional>
#include <sstream>
#include <vector>

namespace tcfp {

namespace {

struct Key {
    const char* name;
    std::function<void(Config&, const std::string&)> set;
    std::function<std::string(const Config&)> get;
};

double parse_double(const std::string& s) {
    try {
        std::size_t pos = 0;
        const double v = std::stod(s, &pos);
        if (pos != s.size())
            throw ConfigError("bad numeric value '" + s + "'");
        return v;
    } catch (const std::logic_error&) {
        throw ConfigError("bad numeric value '" + s + "'");
    }
}

int parse_int(const std::string& s) {
    try {
        std::size_t pos = 0;
        const int v = std::stoi(s, &pos);
        if (pos != s.size())
            throw ConfigError("bad integer value '" + s + "'");
        return v;
    } catch (const std::logic_error&) {
        throw ConfigError("bad integer value '" + s + "'");
    }
}

std::string fmt(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

const std::vector<Key>& keys() {
    auto dkey = [](const char* name, double Config::* f) {
        return Key{name, [f](Config& c, const std::string& s) { c.*f = parse_double(s); },
                   [f](const Config& c) { return fmt(c.*f); }};
    };
    auto ikey = [](const char* name, int Config::* f) {
        return Key{name, [f](Config& c, const std::string& s) { c.*f = parse_int(s); },
                   [f](const Config& c) { return std::to_string(c.*f); }};
    };
    static const std::vector<Key> table = {
        ikey("fs", &Config::fs),
        dkey("window_s", &Config::window_s),
        dkey("overlap", &Config::overlap),
        ikey("m", &Config::m),
        ikey("n", &Config::n),
        dkey("f0", &Config::f0),
        ikey("c", &Config::c),
        dkey("w_t_s", &Config::w_t_s),
        ikey("w_p", &Config::w_p),
        ikey("num_scales", &Config::num_scales),
        dkey("scale_min_s", &Config::scale_min_s),
        dkey("scale_max_s", &Config::scale_max_s),
        dkey("candidates_per_s", &Config::candidates_per_s),
        ikey("q", &Config::q),
        ikey("r", &Config::r),
        dkey("alpha", &Config::alpha),
        dkey("theta_max", &Config::theta_max),
        dkey("delta_s", &Config::delta_s),
        dkey("r_frac", &Config::r_frac),
        ikey("min_window_matches", &Config::min_window_matches),
        dkey("b_bin_s", &Config::b_bin_s),
        dkey("delta_b_s", &Config::delta_b_s),
        ikey("min_support", &Config::min_support),
        ikey("eval_snippets", &Config::eval_snippets),
        dkey("eval_snip_min_s", &Config::eval_snip_min_s),
        dkey("eval_snip_max_s", &Config::eval_snip_max_s),
        dkey("eval_gap_s", &Config::eval_gap_s),
        ikey("eval_seed", &Config::eval_seed),
    };
    return table;
}

} // namespace

void config_set(Config& cfg, const std::string& assignment) {
    const auto eq = assignment.find('=');
    if (eq == std::string::npos)
        throw ConfigError("expected key=value, got '" + assignment + "'");
    std::string key = assignment.substr(0, eq);
    std::string value = assignment.substr(eq + 1);
    auto trim = [](std::string& s) {
        const auto a = s.find_first_not_of(" \t");
        const auto b = s.find_last_not_of(" \t");
        s = a == std::string::npos ? "" : s.substr(a, b - a + 1);
    };
    trim(key);
    trim(value);
    for (const auto& k : keys()) {
        if (key == k.name) {
            k.set(cfg, value);
            return;
        }
    }
    throw ConfigError("unknown config key '" + key + "'");
}

Config load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw IoError("cannot open config " + path);
    Config cfg;
    std::string line;
    while (std::getline(in, line)) {
        const auto hash = line.find('#');
        if (hash != std::string::npos)
            line.erase(hash);
        if (line.find_first_not_of(" \t\r") == std::string::npos)
            continue;
        if (!line.empty() && line.back() == '\r')
            line.pop_back();
        config_set(cfg, line);
    }
    return cfg;
}

std::string dump_config(const Config& cfg) {
    std::ostringstream out;
    for (const auto& k : keys())
        out << k.name << "=" << k.get(cfg) << "\n";
    return out.str();
}

} // namespace tcfp
