#pragma once

#include "tcfp/time_chroma.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace tcfp {

/// Strict local maximum of the time-chroma image (chroma axis wraps).
struct CandidatePoint {
    std::size_t t_frame = 0;
    std::size_t b = 0;
    double value = 0.0;
};

/// Rectangular patch, rows = chroma bins, row-major with contiguous time.
struct Patch {
    std::vector<double> values;
    std::size_t height = 0;
    std::size_t width = 0;

    const double* row(std::size_t i) const { return values.data() + i * width; }
};

/// Representative low-frequency DCT patterns learned from a corpus.
struct PatternDictionary {
    std::vector<std::vector<double>> patterns; // c descriptors of dim q*r-1
    int q = 12;
    int r = 12;
    int m = 72;
    int n = 4;
    double w_t_s = 2.0; // canonical patch width, seconds
    int w_p = 72;       // canonical patch height, bins

    std::size_t size() const { return patterns.size(); }
};

struct FeaturePoint {
    double t_s = 0.0;    // center time, seconds
    int b = 0;           // chroma bin
    double scale_s = 0.0; // assigned time width, seconds
    int ptype = -1;      // dictionary pattern index
    bool scale_at_boundary = false;
};

struct Fingerprint {
    std::vector<double> desc; // q*r - 1 values, zero mean, unit L2 norm
    FeaturePoint point;
    uint32_t song_id = 0;
};

/// Strict 8-neighbor maxima above 1e-6 of the image max, capped at the
/// `max_per_second` highest-valued candidates per second of audio. Output
/// sorted by (frame, bin).
std::vector<CandidatePoint> find_local_maxima(const TimeChromaImage& img,
                                              double max_per_second = 20.0);

/// Number of patch columns covering width_s at the image's frame hop.
std::size_t patch_width_frames(const TimeChromaImage& img, double width_s);

/// Patch of `height_bins` rows centered on bin b (circular) spanning width_s
/// seconds centered on t_frame; frames outside the image are zero-filled.
Patch extract_patch(const TimeChromaImage& img, long t_frame, long b, double width_s,
                    std::size_t height_bins);

/// First q (chroma) x r (time) orthonormal DCT-II coefficients minus the DC
/// term, mean-removed and scaled to unit L2 norm. Returns nullopt for
/// degenerate (constant) patches.
std::optional<std::vector<double>> patch_descriptor(const Patch& patch, int q, int r);

/// k-means (k-means++ seeding, Euclidean) over descriptors of w_t x w_p
/// patches around the corpus images' local maxima. Throws InsufficientPatches
/// when the corpus yields fewer than 10*c usable patches. `cluster_sizes`,
/// when given, receives the final assignment counts.
PatternDictionary build_dictionary(const std::vector<const TimeChromaImage*>& corpus, int c,
                                   double w_t_s, int w_p, uint64_t seed, int q, int r,
                                   std::vector<std::size_t>* cluster_sizes = nullptr);

struct DetectParams {
    double scale_min_s = 1.0;
    double scale_max_s = 4.0;
    int num_scales = 30;
    double max_candidates_per_s = 20.0;
};

/// Stability test: a candidate becomes a feature point when one dictionary
/// pattern wins the correlation at more than half of the scanned scales; the
/// winning pattern is the type and the width with the strongest correlation
/// is the scale.
std::vector<FeaturePoint> detect_features(const TimeChromaImage& img,
                                          const PatternDictionary& dict,
                                          const DetectParams& params);

/// Descriptor of the scale x m patch around each point; degenerate patches
/// are dropped.
std::vector<Fingerprint> fingerprint_features(const TimeChromaImage& img,
                                              const std::vector<FeaturePoint>& points, int q,
                                              int r);

void save_dictionary(const std::string& path, const PatternDictionary& dict);
PatternDictionary load_dictionary(const std::string& path);

} // namespace tcfp
