#pragma once

#include "tcfp/index.hpp"

#include <cstdint>
#include <optional>
#include <vector>

namespace tcfp {

/// Attributes of one accepted query/db feature match.
struct MatchedFeature {
    uint32_t song_id = 0;
    double a_hat = 1.0;  // scale(query) / scale(db)
    int dp_hat = 0;      // (b_query - b_db) mod B, in pitch steps
    double t_q = 0.0;    // query time, seconds
    double t_db = 0.0;   // db time, seconds
};

struct Interval {
    uint32_t song_id = 0;
    double t_start = 0.0;
    double duration = 0.0;

    double t_end() const { return t_start + duration; }
};

struct Detection {
    uint32_t song_id = 0;
    double query_start = 0.0;
    double query_end = 0.0;
    double a = 1.0; // tempo factor in t_q = a * t_db + b
    double b = 0.0; // offset, seconds
    int dp = 0;     // pitch shift, canonical [0, B) pitch steps
    std::size_t support = 0;

    double db_start() const { return (query_start - b) / a; }
    double db_end() const { return (query_end - b) / a; }
    /// signed convenience form in (-B/2, B/2]
    int dp_signed(int period) const { return dp > period / 2 ? dp - period : dp; }
};

struct IdentifyParams {
    double delta_s = 10.0;     // voting window length
    double r_frac = 0.7;       // majority share required to assign a window
    int min_window_matches = 3;
    double a_hist_lo = 0.5;    // tempo-ratio histogram range
    double a_hist_hi = 2.0;
    int a_bins_per_octave = 48;
    double a_sigma_bins = 1.0;
    double b_bin_s = 0.5;      // offset histogram bin width
    double b_sigma_bins = 1.0;
    double delta_b_s = 2.0;    // offset pruning half-window
    std::size_t min_support = 5;
    int chroma_period = 288;   // B = n*m, for pitch-shift arithmetic
};

/// Moving-window vote: windows of `delta_s` seconds at 1 s hop; a window with
/// at least `min_window_matches` matches where one song holds >= r_frac of
/// them is assigned that song, and maximal runs of consecutive same-song
/// windows merge into intervals.
std::vector<Interval> vote_windows(const std::vector<MatchedFeature>& matches, double query_len_s,
                                   const IdentifyParams& params);

/// Histogram-prune tempo ratios and offsets, least-squares fit t_q = a*t_db+b
/// over the survivors, take the pitch shift as the mode of their dp values,
/// and refine the interval ends to the first/last compatible features.
/// Returns nullopt when fewer than min_support features survive pruning
/// (or the fit is degenerate).
std::optional<Detection> localize(const Interval& interval,
                                  const std::vector<MatchedFeature>& matches,
                                  const IdentifyParams& params);

/// Full back end: ratio-test matching, voting, then one localization per
/// interval; detections sorted by query start time.
std::vector<Detection> detect(const FingerprintDB& db, const std::vector<Fingerprint>& query_fps,
                              double query_len_s, double alpha, double theta_max,
                              const IdentifyParams& params);

/// Attribute extraction for accepted match pairs.
std::vector<MatchedFeature> to_matched_features(const FingerprintDB& db,
                                                const std::vector<Fingerprint>& queries,
                                                const std::vector<MatchPair>& pairs,
                                                int chroma_period);

} // namespace tcfp
