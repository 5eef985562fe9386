#pragma once

#include "tcfp/features.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace tcfp {

struct SongInfo {
    uint32_t id = 0;
    std::string title;
    double duration_s = 0.0;
};

/// Accepted nearest-neighbor match; indices refer to the query batch and the
/// database entry order.
struct MatchPair {
    std::size_t query_index = 0;
    std::size_t db_index = 0;
    double angle = 0.0; // radians, arccos of the clamped dot product
};

enum class MatchMode {
    CrossSong, // second nearest drawn from a different song than the nearest
    Literal    // second nearest over all remaining entries
};

/// Flat store of reference fingerprints; matching is an exhaustive scan, so
/// results are exact by construction.
class FingerprintDB {
  public:
    /// Appends a song's fingerprints. Throws DuplicateSongId.
    void add_song(uint32_t song_id, const std::string& title, double duration_s,
                  const std::vector<Fingerprint>& fps);

    /// Eq.-1 ratio test per query descriptor y: accept the nearest entry x
    /// when arccos(y.x) <= alpha * arccos(y.x') for the second nearest x'
    /// (per `mode`) and arccos(y.x) <= theta_max. With no eligible second
    /// nearest the ratio test passes vacuously and the absolute gate decides.
    std::vector<MatchPair> match(const std::vector<Fingerprint>& queries, double alpha,
                                 double theta_max, MatchMode mode = MatchMode::CrossSong) const;

    std::size_t size() const { return song_of_.size(); }
    std::size_t descriptor_dim() const { return dim_; }
    const std::vector<SongInfo>& songs() const { return songs_; }
    const SongInfo* find_song(uint32_t id) const;

    uint32_t entry_song(std::size_t i) const { return song_of_[i]; }
    const FeaturePoint& entry_point(std::size_t i) const { return points_[i]; }
    const double* entry_desc(std::size_t i) const { return descs_.data() + i * dim_; }

    int q = 12, r = 12, m = 72, n = 4; // grid the fingerprints were built on

    void save(const std::string& path) const;
    static FingerprintDB load(const std::string& path);

  private:
    std::vector<SongInfo> songs_;
    std::vector<double> descs_; // size() * dim_, row per entry
    std::vector<FeaturePoint> points_;
    std::vector<uint32_t> song_of_;
    std::size_t dim_ = 0;
};

} // namespace tcfp
