#include "tcfp/features.hpp"

#include "tcfp/errors.hpp"
#include "tcfp/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>
#include <map>
#include <random>
#include <stdexcept>

namespace tcfp {

namespace {

constexpr double kNoiseFloorRatio = 1e-6;

// orthonormal DCT-II basis: count rows of length len
std::vector<double> dct_basis(std::size_t len, int count) {
    std::vector<double> basis(static_cast<std::size_t>(count) * len);
    for (int k = 0; k < count; ++k) {
        const double s = std::sqrt((k == 0 ? 1.0 : 2.0) / static_cast<double>(len));
        for (std::size_t j = 0; j < len; ++j)
            basis[k * len + j] = s * std::cos(M_PI * k * (j + 0.5) / static_cast<double>(len));
    }
    return basis;
}

// chroma-axis DCT of a patch: out is q rows of the patch width
void chroma_dct(const Patch& patch, const std::vector<double>& basis_q, int q,
                std::vector<double>& out) {
    out.assign(static_cast<std::size_t>(q) * patch.width, 0.0);
    for (int u = 0; u < q; ++u) {
        double* dst = out.data() + static_cast<std::size_t>(u) * patch.width;
        for (std::size_t b = 0; b < patch.height; ++b)
            kernels::axpy(dst, patch.row(b), basis_q[u * patch.height + b], patch.width);
    }
}

// project time axis and assemble the normalized descriptor; chroma_rows is
// q x width (row-major), basis_r is r x width
std::optional<std::vector<double>> project_descriptor(const double* chroma_rows, std::size_t width,
                                                      const std::vector<double>& basis_r, int q,
                                                      int r) {
    std::vector<double> desc;
    desc.reserve(static_cast<std::size_t>(q) * r - 1);
    for (int u = 0; u < q; ++u) {
        const double* row = chroma_rows + static_cast<std::size_t>(u) * width;
        for (int v = 0; v < r; ++v) {
            if (u == 0 && v == 0)
                continue;
            desc.push_back(kernels::dot(row, basis_r.data() + static_cast<std::size_t>(v) * width,
                                        width));
        }
    }
    double mean = 0.0;
    for (double x : desc)
        mean += x;
    mean /= static_cast<double>(desc.size());
    for (double& x : desc)
        x -= mean;
    const double norm = std::sqrt(kernels::sumsq(desc.data(), desc.size()));
    if (!(norm > 0.0) || !std::isfinite(norm))
        return std::nullopt;
    for (double& x : desc)
        x /= norm;
    return desc;
}

} // namespace

std::vector<CandidatePoint> find_local_maxima(const TimeChromaImage& img, double max_per_second) {
    const std::size_t B = img.num_bins;
    const std::size_t T = img.num_frames;
    std::vector<CandidatePoint> found;
    if (B < 3 || T < 3)
        return found;

    double global_max = 0.0;
    for (double v : img.values)
        global_max = std::max(global_max, v);
    const double floor = kNoiseFloorRatio * global_max;
    if (!(global_max > 0.0))
        return found;

    for (std::size_t t = 1; t + 1 < T; ++t) {
        for (std::size_t b = 0; b < B; ++b) {
            const double v = img.at(b, t);
            if (v <= floor)
                continue;
            const std::size_t up = (b + 1) % B;
            const std::size_t dn = (b + B - 1) % B;
            if (v > img.at(b, t - 1) && v > img.at(b, t + 1) && v > img.at(dn, t) &&
                v > img.at(up, t) && v > img.at(dn, t - 1) && v > img.at(dn, t + 1) &&
                v > img.at(up, t - 1) && v > img.at(up, t + 1))
                found.push_back({t, b, v});
        }
    }

    // keep the strongest candidates per second of audio
    std::map<long, std::vector<CandidatePoint>> buckets;
    for (const auto& c : found)
        buckets[static_cast<long>(std::floor(img.frame_time_s(static_cast<double>(c.t_frame))))]
            .push_back(c);
    std::vector<CandidatePoint> kept;
    const std::size_t cap = static_cast<std::size_t>(std::max(1.0, max_per_second));
    for (auto& [sec, pts] : buckets) {
        std::sort(pts.begin(), pts.end(), [](const CandidatePoint& a, const CandidatePoint& b) {
            if (a.value != b.value)
                return a.value > b.value;
            if (a.t_frame != b.t_frame)
                return a.t_frame < b.t_frame;
            return a.b < b.b;
        });
        if (pts.size() > cap)
            pts.resize(cap);
        kept.insert(kept.end(), pts.begin(), pts.end());
    }
    std::sort(kept.begin(), kept.end(), [](const CandidatePoint& a, const CandidatePoint& b) {
        if (a.t_frame != b.t_frame)
            return a.t_frame < b.t_frame;
        return a.b < b.b;
    });
    return kept;
}

std::size_t patch_width_frames(const TimeChromaImage& img, double width_s) {
    return static_cast<std::size_t>(std::max(1L, std::lround(width_s / img.frame_hop_s)));
}

Patch extract_patch(const TimeChromaImage& img, long t_frame, long b, double width_s,
                    std::size_t height_bins) {
    if (height_bins == 0 || height_bins > img.num_bins)
        throw std::invalid_argument("extract_patch: bad patch height");
    const std::size_t width = patch_width_frames(img, width_s);
    Patch patch;
    patch.height = height_bins;
    patch.width = width;
    patch.values.assign(height_bins * width, 0.0);

    const long half_lo_t = (static_cast<long>(width) - 1) / 2;
    const long half_lo_b = (static_cast<long>(height_bins) - 1) / 2;
    const long B = static_cast<long>(img.num_bins);
    const long T = static_cast<long>(img.num_frames);

    for (std::size_t i = 0; i < height_bins; ++i) {
        const long src_b = (((b - half_lo_b + static_cast<long>(i)) % B) + B) % B;
        const long t0 = t_frame - half_lo_t;
        const long lo = std::max(0L, t0);
        const long hi = std::min(T, t0 + static_cast<long>(width));
        if (lo >= hi)
            continue;
        std::copy_n(img.row(static_cast<std::size_t>(src_b)) + lo, hi - lo,
                    patch.values.data() + i * width + (lo - t0));
    }
    return patch;
}

std::optional<std::vector<double>> patch_descriptor(const Patch& patch, int q, int r) {
    if (q < 2 || r < 2)
        throw std::invalid_argument("patch_descriptor: q and r must be at least 2");
    if (patch.height < 2 || patch.width < 2)
        throw std::invalid_argument("patch_descriptor: patch must be at least 2x2");
    if (static_cast<std::size_t>(q) > patch.height || static_cast<std::size_t>(r) > patch.width)
        throw std::invalid_argument("patch_descriptor: patch smaller than the DCT block");

    const auto [mn, mx] = std::minmax_element(patch.values.begin(), patch.values.end());
    if (*mn == *mx)
        return std::nullopt; // constant patch

    const std::vector<double> basis_q = dct_basis(patch.height, q);
    const std::vector<double> basis_r = dct_basis(patch.width, r);
    std::vector<double> rows;
    chroma_dct(patch, basis_q, q, rows);
    return project_descriptor(rows.data(), patch.width, basis_r, q, r);
}

namespace {

struct KmeansResult {
    std::vector<std::vector<double>> centroids;
    std::vector<std::size_t> sizes;
};

double sq_dist(const double* a, const double* b, std::size_t dim) {
    double acc = 0.0;
    for (std::size_t i = 0; i < dim; ++i) {
        const double d = a[i] - b[i];
        acc += d * d;
    }
    return acc;
}

KmeansResult kmeans(const std::vector<std::vector<double>>& points, int k, uint64_t seed) {
    const std::size_t n = points.size();
    const std::size_t dim = points[0].size();
    std::mt19937_64 rng(seed);

    // k-means++ seeding
    std::vector<std::vector<double>> centroids;
    centroids.reserve(k);
    std::uniform_int_distribution<std::size_t> first(0, n - 1);
    centroids.push_back(points[first(rng)]);
    std::vector<double> d2(n);
    for (int c = 1; c < k; ++c) {
        double total = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            double best = std::numeric_limits<double>::max();
            for (const auto& ctr : centroids)
                best = std::min(best, sq_dist(points[i].data(), ctr.data(), dim));
            d2[i] = best;
            total += best;
        }
        std::size_t pick = 0;
        if (total > 0.0) {
            std::uniform_real_distribution<double> unif(0.0, total);
            double target = unif(rng);
            for (std::size_t i = 0; i < n; ++i) {
                target -= d2[i];
                if (target <= 0.0) {
                    pick = i;
                    break;
                }
            }
        } else {
            pick = first(rng);
        }
        centroids.push_back(points[pick]);
    }

    std::vector<int> assign(n, 0);
    std::vector<std::size_t> last_counts(k, 0);
    double prev_inertia = std::numeric_limits<double>::max();
    for (int iter = 0; iter < 100; ++iter) {
        double inertia = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            double best = std::numeric_limits<double>::max();
            int best_c = 0;
            for (int c = 0; c < k; ++c) {
                const double d = sq_dist(points[i].data(), centroids[c].data(), dim);
                if (d < best) {
                    best = d;
                    best_c = c;
                }
            }
            assign[i] = best_c;
            inertia += best;
        }

        std::vector<std::vector<double>> sums(k, std::vector<double>(dim, 0.0));
        std::vector<std::size_t> counts(k, 0);
        for (std::size_t i = 0; i < n; ++i) {
            kernels::axpy(sums[assign[i]].data(), points[i].data(), 1.0, dim);
            ++counts[assign[i]];
        }
        for (int c = 0; c < k; ++c) {
            if (counts[c] == 0) {
                // re-seed an empty cluster with the point farthest from its centroid
                std::size_t far = 0;
                double far_d = -1.0;
                for (std::size_t i = 0; i < n; ++i) {
                    const double d = sq_dist(points[i].data(), centroids[assign[i]].data(), dim);
                    if (d > far_d) {
                        far_d = d;
                        far = i;
                    }
                }
                centroids[c] = points[far];
            } else {
                for (std::size_t j = 0; j < dim; ++j)
                    centroids[c][j] = sums[c][j] / static_cast<double>(counts[c]);
            }
        }
        if (prev_inertia != std::numeric_limits<double>::max() &&
            std::abs(prev_inertia - inertia) <= 1e-6 * std::max(prev_inertia, 1e-300)) {
            last_counts = std::move(counts);
            break;
        }
        prev_inertia = inertia;
        last_counts = std::move(counts);
    }
    return {std::move(centroids), std::move(last_counts)};
}

} // namespace

PatternDictionary build_dictionary(const std::vector<const TimeChromaImage*>& corpus, int c,
                                   double w_t_s, int w_p, uint64_t seed, int q, int r,
                                   std::vector<std::size_t>* cluster_sizes) {
    if (c < 1)
        throw std::invalid_argument("build_dictionary: need at least one pattern");
    std::vector<std::vector<double>> descs;
    for (const TimeChromaImage* img : corpus) {
        for (const auto& cand : find_local_maxima(*img)) {
            const Patch patch = extract_patch(*img, static_cast<long>(cand.t_frame),
                                              static_cast<long>(cand.b), w_t_s,
                                              static_cast<std::size_t>(w_p));
            if (auto d = patch_descriptor(patch, q, r))
                descs.push_back(std::move(*d));
        }
    }
    if (descs.size() < static_cast<std::size_t>(10 * c))
        throw InsufficientPatches("build_dictionary: corpus yielded " +
                                  std::to_string(descs.size()) + " patches, need " +
                                  std::to_string(10 * c));

    KmeansResult km = kmeans(descs, c, seed);
    if (cluster_sizes)
        *cluster_sizes = km.sizes;

    PatternDictionary dict;
    dict.q = q;
    dict.r = r;
    dict.w_t_s = w_t_s;
    dict.w_p = w_p;
    if (!corpus.empty()) {
        dict.m = corpus.front()->params.m;
        dict.n = corpus.front()->params.n;
    }
    for (auto& ctr : km.centroids) {
        double mean = 0.0;
        for (double x : ctr)
            mean += x;
        mean /= static_cast<double>(ctr.size());
        for (double& x : ctr)
            x -= mean;
        const double norm = std::sqrt(kernels::sumsq(ctr.data(), ctr.size()));
        if (norm > 0.0)
            for (double& x : ctr)
                x /= norm;
        dict.patterns.push_back(std::move(ctr));
    }
    return dict;
}

std::vector<FeaturePoint> detect_features(const TimeChromaImage& img,
                                          const PatternDictionary& dict,
                                          const DetectParams& params) {
    if (dict.patterns.empty())
        throw std::invalid_argument("detect_features: empty dictionary");
    const int q = dict.q;
    const int r = dict.r;
    const int num_scales = params.num_scales;

    // geometric scale grid, widest last
    std::vector<double> widths_s(num_scales);
    std::vector<std::size_t> widths_f(num_scales);
    for (int k = 0; k < num_scales; ++k) {
        const double frac = num_scales > 1 ? static_cast<double>(k) / (num_scales - 1) : 0.0;
        widths_s[k] = params.scale_min_s * std::pow(params.scale_max_s / params.scale_min_s, frac);
        widths_f[k] = patch_width_frames(img, widths_s[k]);
    }
    const std::size_t w_max = widths_f.back();
    const long lo_max = (static_cast<long>(w_max) - 1) / 2;

    const std::size_t height = static_cast<std::size_t>(dict.w_p);
    const std::vector<double> basis_q = dct_basis(height, q);
    std::vector<std::vector<double>> basis_r(num_scales);
    for (int k = 0; k < num_scales; ++k)
        basis_r[k] = dct_basis(widths_f[k], r);

    std::vector<FeaturePoint> out;
    std::vector<double> rows;
    for (const auto& cand : find_local_maxima(img, params.max_candidates_per_s)) {
        const Patch widest = extract_patch(img, static_cast<long>(cand.t_frame),
                                           static_cast<long>(cand.b), widths_s.back(), height);
        chroma_dct(widest, basis_q, q, rows);

        std::vector<int> votes(dict.size(), 0);
        std::vector<double> best_corr_for(dict.size(), -2.0);
        std::vector<int> best_scale_for(dict.size(), -1);
        for (int k = 0; k < num_scales; ++k) {
            const std::size_t w = widths_f[k];
            const long off = lo_max - (static_cast<long>(w) - 1) / 2;
            // the narrower patch is a centered slice of the widest one, so its
            // chroma DCT is a column slice of `rows`
            std::vector<double> sliced(static_cast<std::size_t>(q) * w);
            for (int u = 0; u < q; ++u)
                std::copy_n(rows.data() + static_cast<std::size_t>(u) * w_max + off, w,
                            sliced.data() + static_cast<std::size_t>(u) * w);
            const auto desc = project_descriptor(sliced.data(), w, basis_r[k], q, r);
            if (!desc)
                continue;
            int winner = -1;
            double best = -2.0;
            for (std::size_t p = 0; p < dict.size(); ++p) {
                const double corr =
                    kernels::dot(desc->data(), dict.patterns[p].data(), desc->size());
                if (corr > best) {
                    best = corr;
                    winner = static_cast<int>(p);
                }
            }
            if (winner < 0)
                continue;
            ++votes[winner];
            if (best > best_corr_for[winner]) {
                best_corr_for[winner] = best;
                best_scale_for[winner] = k;
            }
        }

        int top_pattern = -1;
        int top_votes = 0;
        for (std::size_t p = 0; p < dict.size(); ++p) {
            if (votes[p] > top_votes) {
                top_votes = votes[p];
                top_pattern = static_cast<int>(p);
            }
        }
        if (top_pattern < 0 || 2 * top_votes <= num_scales)
            continue; // stability rule: strictly more than half the scales

        const int k = best_scale_for[top_pattern];
        FeaturePoint fp;
        fp.t_s = img.frame_time_s(static_cast<double>(cand.t_frame));
        fp.b = static_cast<int>(cand.b);
        fp.scale_s = widths_s[k];
        fp.ptype = top_pattern;
        fp.scale_at_boundary = (k == 0 || k == num_scales - 1);
        out.push_back(fp);
    }
    return out;
}

std::vector<Fingerprint> fingerprint_features(const TimeChromaImage& img,
                                              const std::vector<FeaturePoint>& points, int q,
                                              int r) {
    std::vector<Fingerprint> out;
    out.reserve(points.size());
    const std::size_t height = static_cast<std::size_t>(img.params.m);
    for (const auto& p : points) {
        const long t_frame = std::lround((p.t_s - img.frame0_center_s) / img.frame_hop_s);
        const Patch patch = extract_patch(img, t_frame, p.b, p.scale_s, height);
        auto desc = patch_descriptor(patch, q, r);
        if (!desc)
            continue;
        Fingerprint fp;
        fp.desc = std::move(*desc);
        fp.point = p;
        out.push_back(std::move(fp));
    }
    return out;
}

namespace {

constexpr char kDictMagic[8] = {'T', 'C', 'D', 'I', 'C', 'T', '0', '1'};

template <typename T>
void write_pod(std::ostream& out, T v) {
    out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T read_pod(std::istream& in) {
    T v{};
    in.read(reinterpret_cast<char*>(&v), sizeof(T));
    if (!in)
        throw FormatVersionMismatch("unexpected end of file");
    return v;
}

} // namespace

void save_dictionary(const std::string& path, const PatternDictionary& dict) {
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw IoError("cannot create " + path);
    out.write(kDictMagic, sizeof(kDictMagic));
    write_pod<uint32_t>(out, static_cast<uint32_t>(dict.patterns.size()));
    write_pod<uint32_t>(out, static_cast<uint32_t>(dict.q));
    write_pod<uint32_t>(out, static_cast<uint32_t>(dict.r));
    write_pod<uint32_t>(out, static_cast<uint32_t>(dict.m));
    write_pod<uint32_t>(out, static_cast<uint32_t>(dict.n));
    write_pod<uint32_t>(out, static_cast<uint32_t>(std::lround(dict.w_t_s * 1000.0)));
    write_pod<uint32_t>(out, static_cast<uint32_t>(dict.w_p));
    for (const auto& p : dict.patterns)
        out.write(reinterpret_cast<const char*>(p.data()),
                  static_cast<std::streamsize>(p.size() * sizeof(double)));
    if (!out)
        throw IoError("write failed: " + path);
}

PatternDictionary load_dictionary(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw IoError("cannot open " + path);
    char magic[8];
    in.read(magic, 8);
    if (!in || std::memcmp(magic, kDictMagic, 8) != 0)
        throw FormatVersionMismatch(path + ": not a TCDICT01 file");
    PatternDictionary dict;
    const uint32_t c = read_pod<uint32_t>(in);
    dict.q = static_cast<int>(read_pod<uint32_t>(in));
    dict.r = static_cast<int>(read_pod<uint32_t>(in));
    dict.m = static_cast<int>(read_pod<uint32_t>(in));
    dict.n = static_cast<int>(read_pod<uint32_t>(in));
    dict.w_t_s = read_pod<uint32_t>(in) / 1000.0;
    dict.w_p = static_cast<int>(read_pod<uint32_t>(in));
    const std::size_t dim = static_cast<std::size_t>(dict.q) * dict.r - 1;
    dict.patterns.resize(c);
    for (auto& p : dict.patterns) {
        p.resize(dim);
        in.read(reinterpret_cast<char*>(p.data()),
                static_cast<std::streamsize>(dim * sizeof(double)));
        if (!in)
            throw FormatVersionMismatch(path + ": truncated dictionary");
    }
    return dict;
}

} // namespace tcfp
