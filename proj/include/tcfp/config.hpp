#pragma once

#include "tcfp/features.hpp"
#include "tcfp/identify.hpp"
#include "tcfp/time_chroma.hpp"

#include <string>

namespace tcfp {

/// Every tunable of the pipeline, flat key=value form on disk. Unknown keys
/// are hard errors so typos cannot silently fall back to defaults.
struct Config {
    // canonical audio / spectrogram
    int fs = 8820;
    double window_s = 0.1;
    double overlap = 0.75;
    // chroma grid
    int m = 72;
    int n = 4;
    double f0 = 80.0;
    // dictionary
    int c = 10;
    double w_t_s = 2.0;
    int w_p = 72;
    // feature scan
    int num_scales = 30;
    double scale_min_s = 1.0;
    double scale_max_s = 4.0;
    double candidates_per_s = 20.0;
    int q = 12;
    int r = 12;
    // matching
    double alpha = 0.6;
    double theta_max = 0.4;
    // identification
    double delta_s = 10.0;
    double r_frac = 0.7;
    int min_window_matches = 3;
    double b_bin_s = 0.5;
    double delta_b_s = 2.0;
    int min_support = 5;
    // evaluation harness
    int eval_snippets = 10;
    double eval_snip_min_s = 10.0;
    double eval_snip_max_s = 20.0;
    double eval_gap_s = 1.0;
    int eval_seed = 7;

    ChromaParams chroma() const { return {m, n, f0, fs}; }
    DetectParams detect_params() const {
        return {scale_min_s, scale_max_s, num_scales, candidates_per_s};
    }
    IdentifyParams identify_params() const {
        IdentifyParams p;
        p.delta_s = delta_s;
        p.r_frac = r_frac;
        p.min_window_matches = min_window_matches;
        p.b_bin_s = b_bin_s;
        p.delta_b_s = delta_b_s;
        p.min_support = static_cast<std::size_t>(min_support);
        p.chroma_period = m * n;
        return p;
    }
};

/// Apply one "key=value" assignment. Throws ConfigError for unknown keys or
/// unparseable values.
void config_set(Config& cfg, const std::string& assignment);

/// Load a flat key=value file ('#' comments and blank lines allowed).
Config load_config(const std::string& path);

/// All keys in a fixed order, ready to be written back.
std::string dump_config(const Config& cfg);

} // namespace tcfp
