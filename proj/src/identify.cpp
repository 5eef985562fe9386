#include "tcfp/identify.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <stdexcept>

namespace tcfp {

namespace {

// Gaussian-smoothed histogram peak; returns the index of the maximum bin
// (smallest index on ties).
std::size_t smoothed_argmax(const std::vector<double>& hist, double sigma_bins) {
    const int radius = std::max(1, static_cast<int>(std::ceil(3.0 * sigma_bins)));
    std::vector<double> kernel(2 * radius + 1);
    double ksum = 0.0;
    for (int i = -radius; i <= radius; ++i) {
        kernel[i + radius] = std::exp(-0.5 * (i / sigma_bins) * (i / sigma_bins));
        ksum += kernel[i + radius];
    }
    for (double& k : kernel)
        k /= ksum;

    std::size_t best = 0;
    double best_v = -1.0;
    const long n = static_cast<long>(hist.size());
    for (long i = 0; i < n; ++i) {
        double acc = 0.0;
        for (int j = -radius; j <= radius; ++j) {
            const long src = i + j;
            if (src >= 0 && src < n)
                acc += kernel[j + radius] * hist[src];
        }
        if (acc > best_v) {
            best_v = acc;
            best = static_cast<std::size_t>(i);
        }
    }
    return best;
}

} // namespace

std::vector<Interval> vote_windows(const std::vector<MatchedFeature>& matches, double query_len_s,
                                   const IdentifyParams& params) {
    if (params.r_frac <= 0.5)
        throw std::invalid_argument("vote_windows: majority share must exceed 0.5");
    std::vector<Interval> intervals;
    if (matches.empty() || query_len_s <= 0.0)
        return intervals;

    const double delta = params.delta_s;
    const long num_windows =
        query_len_s > delta ? static_cast<long>(std::floor(query_len_s - delta)) + 1 : 1;

    // song assigned per window, or -1
    std::vector<long> assigned(num_windows, -1);
    for (long k = 0; k < num_windows; ++k) {
        const double lo = static_cast<double>(k);
        const double hi = std::min(lo + delta, query_len_s);
        std::map<uint32_t, std::size_t> counts;
        std::size_t total = 0;
        for (const auto& mf : matches) {
            if (mf.t_q >= lo && mf.t_q < hi) {
                ++counts[mf.song_id];
                ++total;
            }
        }
        if (total < static_cast<std::size_t>(params.min_window_matches))
            continue;
        for (const auto& [song, cnt] : counts) {
            if (static_cast<double>(cnt) >= params.r_frac * static_cast<double>(total)) {
                assigned[k] = song;
                break; // r_frac > 0.5 makes the holder unique
            }
        }
    }

    long run_start = -1;
    for (long k = 0; k <= num_windows; ++k) {
        const bool continues =
            k < num_windows && assigned[k] >= 0 && run_start >= 0 && assigned[k] == assigned[run_start];
        if (continues)
            continue;
        if (run_start >= 0) {
            Interval iv;
            iv.song_id = static_cast<uint32_t>(assigned[run_start]);
            iv.t_start = static_cast<double>(run_start);
            iv.duration = std::min(static_cast<double>(k - 1) + delta, query_len_s) - iv.t_start;
            intervals.push_back(iv);
        }
        run_start = (k < num_windows && assigned[k] >= 0) ? k : -1;
    }
    return intervals;
}

std::optional<Detection> localize(const Interval& interval,
                                  const std::vector<MatchedFeature>& matches,
                                  const IdentifyParams& params) {
    // (1) drop features from other songs; canonical order makes the whole
    // estimate independent of how the matches arrived
    std::vector<MatchedFeature> fs;
    for (const auto& mf : matches)
        if (mf.song_id == interval.song_id)
            fs.push_back(mf);
    if (fs.size() < params.min_support)
        return std::nullopt;
    std::sort(fs.begin(), fs.end(), [](const MatchedFeature& x, const MatchedFeature& y) {
        if (x.t_q != y.t_q)
            return x.t_q < y.t_q;
        if (x.t_db != y.t_db)
            return x.t_db < y.t_db;
        if (x.a_hat != y.a_hat)
            return x.a_hat < y.a_hat;
        return x.dp_hat < y.dp_hat;
    });

    // (2-3) histogram of log tempo ratios, smooth, take the peak
    const double log_lo = std::log2(params.a_hist_lo);
    const double log_hi = std::log2(params.a_hist_hi);
    const double bin_w = 1.0 / params.a_bins_per_octave;
    const std::size_t a_bins = static_cast<std::size_t>(std::ceil((log_hi - log_lo) / bin_w));
    std::vector<double> a_hist(a_bins, 0.0);
    for (const auto& mf : fs) {
        if (!(mf.a_hat > 0.0))
            continue;
        const double pos = (std::log2(mf.a_hat) - log_lo) / bin_w;
        if (pos < 0.0 || pos >= static_cast<double>(a_bins))
            continue;
        a_hist[static_cast<std::size_t>(pos)] += 1.0;
    }
    const std::size_t a_peak = smoothed_argmax(a_hist, params.a_sigma_bins);
    const double a_tilde = std::exp2(log_lo + (static_cast<double>(a_peak) + 0.5) * bin_w);

    // (4) prune tempo-ratio outliers: one semitone-equivalent step around the peak
    const double delta_a = a_tilde * (std::exp2(1.0 / 12.0) - 1.0);
    std::vector<MatchedFeature> kept_a;
    for (const auto& mf : fs)
        if (mf.a_hat > a_tilde - delta_a && mf.a_hat < a_tilde + delta_a)
            kept_a.push_back(mf);
    if (kept_a.size() < params.min_support)
        return std::nullopt;

    // (5-7) offsets relative to the peak tempo; both time axes are centered
    // first so the histogram peak sits near zero
    double mean_tq = 0.0, mean_tdb = 0.0;
    for (const auto& mf : kept_a) {
        mean_tq += mf.t_q;
        mean_tdb += mf.t_db;
    }
    mean_tq /= static_cast<double>(kept_a.size());
    mean_tdb /= static_cast<double>(kept_a.size());

    std::vector<double> b_vals(kept_a.size());
    double b_min = 0.0, b_max = 0.0;
    for (std::size_t i = 0; i < kept_a.size(); ++i) {
        b_vals[i] = (kept_a[i].t_q - mean_tq) - a_tilde * (kept_a[i].t_db - mean_tdb);
        b_min = std::min(b_min, b_vals[i]);
        b_max = std::max(b_max, b_vals[i]);
    }
    const std::size_t b_bins =
        static_cast<std::size_t>(std::floor((b_max - b_min) / params.b_bin_s)) + 1;
    std::vector<double> b_hist(b_bins, 0.0);
    for (double b : b_vals) {
        std::size_t bin = static_cast<std::size_t>((b - b_min) / params.b_bin_s);
        bin = std::min(bin, b_bins - 1);
        b_hist[bin] += 1.0;
    }
    const std::size_t b_peak = smoothed_argmax(b_hist, params.b_sigma_bins);
    const double b_tilde = b_min + (static_cast<double>(b_peak) + 0.5) * params.b_bin_s;

    // (8) prune offset outliers
    std::vector<MatchedFeature> kept;
    for (std::size_t i = 0; i < kept_a.size(); ++i)
        if (b_vals[i] > b_tilde - params.delta_b_s && b_vals[i] < b_tilde + params.delta_b_s)
            kept.push_back(kept_a[i]);
    if (kept.size() < params.min_support)
        return std::nullopt;

    // (9) closed-form least squares for t_q = a*t_db + b over the survivors
    double sx = 0.0, sy = 0.0;
    for (const auto& mf : kept) {
        sx += mf.t_db;
        sy += mf.t_q;
    }
    const double mx = sx / static_cast<double>(kept.size());
    const double my = sy / static_cast<double>(kept.size());
    double sxx = 0.0, sxy = 0.0;
    for (const auto& mf : kept) {
        sxx += (mf.t_db - mx) * (mf.t_db - mx);
        sxy += (mf.t_db - mx) * (mf.t_q - my);
    }
    if (sxx <= 1e-12)
        return std::nullopt; // all db times coincide, slope undefined
    const double a = sxy / sxx;
    const double b = my - a * mx;
    if (!(a > 0.0))
        return std::nullopt;

    // (10) pitch shift: mode of the surviving dp values, smallest on ties
    std::map<int, std::size_t> dp_counts;
    for (const auto& mf : kept)
        ++dp_counts[((mf.dp_hat % params.chroma_period) + params.chroma_period) %
                    params.chroma_period];
    int dp = 0;
    std::size_t dp_best = 0;
    for (const auto& [v, cnt] : dp_counts) {
        if (cnt > dp_best) { // map is ordered, so first max = smallest value
            dp_best = cnt;
            dp = v;
        }
    }

    // boundary refinement: first/last surviving features compatible with (a, b)
    double lo = std::numeric_limits<double>::max();
    double hi = std::numeric_limits<double>::lowest();
    for (const auto& mf : kept) {
        if (std::abs(mf.t_q - a * mf.t_db - b) < params.delta_b_s) {
            lo = std::min(lo, mf.t_q);
            hi = std::max(hi, mf.t_q);
        }
    }
    if (lo > hi)
        return std::nullopt;

    Detection det;
    det.song_id = interval.song_id;
    det.query_start = lo;
    det.query_end = hi;
    det.a = a;
    det.b = b;
    det.dp = dp;
    det.support = kept.size();
    return det;
}

std::vector<MatchedFeature> to_matched_features(const FingerprintDB& db,
                                                const std::vector<Fingerprint>& queries,
                                                const std::vector<MatchPair>& pairs,
                                                int chroma_period) {
    std::vector<MatchedFeature> out;
    out.reserve(pairs.size());
    for (const auto& mp : pairs) {
        const FeaturePoint& qp = queries[mp.query_index].point;
        const FeaturePoint& dp = db.entry_point(mp.db_index);
        MatchedFeature mf;
        mf.song_id = db.entry_song(mp.db_index);
        mf.a_hat = qp.scale_s / dp.scale_s;
        mf.dp_hat = (((qp.b - dp.b) % chroma_period) + chroma_period) % chroma_period;
        mf.t_q = qp.t_s;
        mf.t_db = dp.t_s;
        out.push_back(mf);
    }
    return out;
}

std::vector<Detection> detect(const FingerprintDB& db, const std::vector<Fingerprint>& query_fps,
                              double query_len_s, double alpha, double theta_max,
                              const IdentifyParams& params) {
    const auto pairs = db.match(query_fps, alpha, theta_max);
    const auto matched = to_matched_features(db, query_fps, pairs, params.chroma_period);
    const auto intervals = vote_windows(matched, query_len_s, params);

    std::vector<Detection> detections;
    for (const auto& iv : intervals) {
        std::vector<MatchedFeature> in_iv;
        for (const auto& mf : matched)
            if (mf.t_q >= iv.t_start && mf.t_q <= iv.t_end())
                in_iv.push_back(mf);
        if (auto det = localize(iv, in_iv, params))
            detections.push_back(*det);
    }
    std::sort(detections.begin(), detections.end(),
              [](const Detection& a, const Detection& b) { return a.query_start < b.query_start; });
    return detections;
}

} // namespace tcfp
