#include "tcfp/index.hpp"

#include "tcfp/errors.hpp"
#include "tcfp/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <stdexcept>

namespace tcfp {

void FingerprintDB::add_song(uint32_t song_id, const std::string& title, double duration_s,
                             const std::vector<Fingerprint>& fps) {
    for (const auto& s : songs_)
        if (s.id == song_id)
            throw DuplicateSongId("song id " + std::to_string(song_id) + " already indexed");
    songs_.push_back({song_id, title, duration_s});
    for (const auto& fp : fps) {
        if (dim_ == 0)
            dim_ = fp.desc.size();
        if (fp.desc.size() != dim_)
            throw std::invalid_argument("add_song: inconsistent descriptor dimension");
        descs_.insert(descs_.end(), fp.desc.begin(), fp.desc.end());
        points_.push_back(fp.point);
        song_of_.push_back(song_id);
    }
}

const SongInfo* FingerprintDB::find_song(uint32_t id) const {
    for (const auto& s : songs_)
        if (s.id == id)
            return &s;
    return nullptr;
}

std::vector<MatchPair> FingerprintDB::match(const std::vector<Fingerprint>& queries, double alpha,
                                            double theta_max, MatchMode mode) const {
    if (alpha <= 0.0 || alpha >= 1.0)
        throw std::invalid_argument("match: alpha must be in (0, 1)");
    std::vector<MatchPair> out;
    const std::size_t n = size();
    if (n == 0)
        return out;

    for (std::size_t qi = 0; qi < queries.size(); ++qi) {
        const double* y = queries[qi].desc.data();
        std::size_t best_i = 0;
        double best = -2.0;
        double second = -2.0;
        bool has_second = false;
        for (std::size_t i = 0; i < n; ++i) {
            const double d = kernels::dot(y, entry_desc(i), dim_);
            if (d > best) {
                const bool different =
                    mode == MatchMode::Literal || (i > 0 && song_of_[i] != song_of_[best_i]);
                if (i > 0 && different) {
                    second = best;
                    has_second = true;
                }
                best = d;
                best_i = i;
            } else if (d > second) {
                if (mode == MatchMode::Literal || song_of_[i] != song_of_[best_i]) {
                    second = d;
                    has_second = true;
                }
            }
        }
        const double ang1 = std::acos(std::clamp(best, -1.0, 1.0));
        if (ang1 > theta_max)
            continue;
        if (has_second) {
            const double ang2 = std::acos(std::clamp(second, -1.0, 1.0));
            if (ang1 > alpha * ang2)
                continue;
        }
        out.push_back({qi, best_i, ang1});
    }
    return out;
}

namespace {

constexpr char kDbMagic[8] = {'T', 'C', 'F', 'D', 'B', '0', '0', '1'};

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

void write_string(std::ostream& out, const std::string& s) {
    write_pod<uint32_t>(out, static_cast<uint32_t>(s.size()));
    out.write(s.data(), static_cast<std::streamsize>(s.size()));
}

std::string read_string(std::istream& in) {
    const uint32_t len = read_pod<uint32_t>(in);
    std::string s(len, '\0');
    in.read(s.data(), len);
    if (!in)
        throw FormatVersionMismatch("unexpected end of file");
    return s;
}

} // namespace

void FingerprintDB::save(const std::string& path) const {
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw IoError("cannot create " + path);
    out.write(kDbMagic, sizeof(kDbMagic));
    write_pod<uint32_t>(out, static_cast<uint32_t>(q));
    write_pod<uint32_t>(out, static_cast<uint32_t>(r));
    write_pod<uint32_t>(out, static_cast<uint32_t>(m));
    write_pod<uint32_t>(out, static_cast<uint32_t>(n));
    write_pod<uint32_t>(out, static_cast<uint32_t>(songs_.size()));
    write_pod<uint64_t>(out, static_cast<uint64_t>(size()));
    write_pod<uint64_t>(out, static_cast<uint64_t>(dim_));
    for (const auto& s : songs_) {
        write_pod<uint32_t>(out, s.id);
        write_string(out, s.title);
        write_pod<double>(out, s.duration_s);
    }
    for (std::size_t i = 0; i < size(); ++i) {
        write_pod<uint32_t>(out, song_of_[i]);
        const FeaturePoint& p = points_[i];
        write_pod<double>(out, p.t_s);
        write_pod<int32_t>(out, p.b);
        write_pod<double>(out, p.scale_s);
        write_pod<int32_t>(out, p.ptype);
        out.write(reinterpret_cast<const char*>(entry_desc(i)),
                  static_cast<std::streamsize>(dim_ * sizeof(double)));
    }
    if (!out)
        throw IoError("write failed: " + path);
}

FingerprintDB FingerprintDB::load(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw IoError("cannot open " + path);
    char magic[8];
    in.read(magic, 8);
    if (!in || std::memcmp(magic, kDbMagic, 8) != 0)
        throw FormatVersionMismatch(path + ": not a TCFDB001 file");

    FingerprintDB db;
    db.q = static_cast<int>(read_pod<uint32_t>(in));
    db.r = static_cast<int>(read_pod<uint32_t>(in));
    db.m = static_cast<int>(read_pod<uint32_t>(in));
    db.n = static_cast<int>(read_pod<uint32_t>(in));
    const uint32_t num_songs = read_pod<uint32_t>(in);
    const uint64_t num_entries = read_pod<uint64_t>(in);
    db.dim_ = static_cast<std::size_t>(read_pod<uint64_t>(in));
    db.songs_.resize(num_songs);
    for (auto& s : db.songs_) {
        s.id = read_pod<uint32_t>(in);
        s.title = read_string(in);
        s.duration_s = read_pod<double>(in);
    }
    db.descs_.resize(num_entries * db.dim_);
    db.points_.resize(num_entries);
    db.song_of_.resize(num_entries);
    for (uint64_t i = 0; i < num_entries; ++i) {
        db.song_of_[i] = read_pod<uint32_t>(in);
        FeaturePoint& p = db.points_[i];
        p.t_s = read_pod<double>(in);
        p.b = static_cast<int>(read_pod<int32_t>(in));
        p.scale_s = read_pod<double>(in);
        p.ptype = static_cast<int>(read_pod<int32_t>(in));
        in.read(reinterpret_cast<char*>(db.descs_.data() + i * db.dim_),
                static_cast<std::streamsize>(db.dim_ * sizeof(double)));
        if (!in)
            throw FormatVersionMismatch(path + ": truncated database");
    }
    return db;
}

} // namespace tcfp
