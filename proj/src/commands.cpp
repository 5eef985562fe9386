#include "tcfp/commands.hpp"

#include "tcfp/errors.hpp"
#include "tcfp/spectrogram.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <ostream>
#include <random>
#include <sstream>

namespace fs = std::filesystem;

namespace tcfp {

namespace {

std::vector<std::string> wav_files_sorted(const std::string& dir) {
    std::vector<std::string> files;
    if (!fs::is_directory(dir))
        throw IoError(dir + " is not a directory");
    for (const auto& entry : fs::directory_iterator(dir)) {
        if (entry.is_regular_file() && entry.path().extension() == ".wav")
            files.push_back(entry.path().string());
    }
    std::sort(files.begin(), files.end());
    return files;
}

uint64_t file_hash(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw IoError("cannot open " + path);
    uint64_t h = 0xcbf29ce484222325ull; // FNV-1a
    char buf[65536];
    while (in.read(buf, sizeof(buf)) || in.gcount() > 0) {
        const std::streamsize got = in.gcount();
        for (std::streamsize i = 0; i < got; ++i) {
            h ^= static_cast<unsigned char>(buf[i]);
            h *= 0x100000001b3ull;
        }
        if (got < static_cast<std::streamsize>(sizeof(buf)))
            break;
    }
    return h;
}

std::string num(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.6f", v);
    return buf;
}

} // namespace

TimeChromaImage image_of(const AudioSignal& sig, const Config& cfg) {
    const AudioSignal canon = resample(sig, cfg.fs);
    const Spectrogram spec = stft_magnitude(canon, cfg.window_s, cfg.overlap);
    const PitchFilterBank bank = build_filter_bank(cfg.chroma(), spec.bin_hz);
    return compute_time_chroma(spec, bank);
}

std::vector<Fingerprint> fingerprints_of(const TimeChromaImage& img,
                                         const PatternDictionary& dict, const Config& cfg) {
    const auto points = detect_features(img, dict, cfg.detect_params());
    return fingerprint_features(img, points, dict.q, dict.r);
}

void cmd_gen_corpus(const std::string& out_dir, int count, double length_s, uint64_t base_seed,
                    const Config& cfg) {
    fs::create_directories(out_dir);
    std::ofstream manifest(fs::path(out_dir) / "manifest.tsv");
    if (!manifest)
        throw IoError("cannot write manifest in " + out_dir);
    manifest << "# file\tseed\tlength_s\n";
    for (int i = 0; i < count; ++i) {
        const uint64_t seed = base_seed + static_cast<uint64_t>(i);
        auto [score, sig] = generate_song(seed, length_s, cfg.chroma());
        char name[32];
        std::snprintf(name, sizeof(name), "song_%03d.wav", i);
        write_wav((fs::path(out_dir) / name).string(), sig);
        manifest << name << "\t" << seed << "\t" << num(length_s) << "\n";
    }
}

void cmd_build_dict(const std::string& corpus_dir, const std::string& out_path, uint64_t seed,
                    const Config& cfg, std::ostream& log) {
    const auto files = wav_files_sorted(corpus_dir);
    if (files.empty())
        throw IoError("no WAV files in " + corpus_dir);
    std::vector<TimeChromaImage> images;
    images.reserve(files.size());
    for (const auto& f : files)
        images.push_back(image_of(load_wav(f), cfg));
    std::vector<const TimeChromaImage*> ptrs;
    for (const auto& img : images)
        ptrs.push_back(&img);

    std::vector<std::size_t> sizes;
    const PatternDictionary dict =
        build_dictionary(ptrs, cfg.c, cfg.w_t_s, cfg.w_p, seed, cfg.q, cfg.r, &sizes);
    save_dictionary(out_path, dict);
    log << "dictionary: " << dict.size() << " patterns from " << files.size() << " songs\n";
    for (std::size_t i = 0; i < sizes.size(); ++i)
        log << "  pattern " << i << ": " << sizes[i] << " patches\n";
}

void cmd_ingest(const std::string& corpus_dir, const std::string& dict_path,
                const std::string& db_path, const Config& cfg, std::ostream& log) {
    const PatternDictionary dict = load_dictionary(dict_path);
    const auto files = wav_files_sorted(corpus_dir);
    if (files.empty())
        throw IoError("no WAV files in " + corpus_dir);

    FingerprintDB db;
    db.q = dict.q;
    db.r = dict.r;
    db.m = dict.m;
    db.n = dict.n;
    std::map<uint64_t, std::string> seen;
    uint32_t next_id = 0;
    for (const auto& f : files) {
        const uint64_t h = file_hash(f);
        if (auto it = seen.find(h); it != seen.end()) {
            log << "skip " << f << " (same content as " << it->second << ")\n";
            continue;
        }
        seen.emplace(h, f);
        const AudioSignal sig = load_wav(f);
        const TimeChromaImage img = image_of(sig, cfg);
        const auto fps = fingerprints_of(img, dict, cfg);
        db.add_song(next_id, fs::path(f).filename().string(), sig.duration_s(), fps);
        log << "song " << next_id << " " << fs::path(f).filename().string() << ": " << fps.size()
            << " fingerprints\n";
        ++next_id;
    }
    db.save(db_path);
    log << "indexed " << db.size() << " fingerprints from " << next_id << " songs\n";
}

void write_detections(std::ostream& out, const std::vector<Detection>& detections) {
    out << "# song_id\tquery_start\tquery_end\tdb_start\tdb_end\ta\tb\tdp\tsupport\n";
    for (const auto& d : detections) {
        out << d.song_id << "\t" << num(d.query_start) << "\t" << num(d.query_end) << "\t"
            << num(d.db_start()) << "\t" << num(d.db_end()) << "\t" << num(d.a) << "\t"
            << num(d.b) << "\t" << d.dp << "\t" << d.support << "\n";
    }
}

std::vector<Detection> cmd_query(const std::string& db_path, const std::string& dict_path,
                                 const std::string& query_wav, const Config& cfg,
                                 std::ostream& out, std::ostream& log) {
    const FingerprintDB db = FingerprintDB::load(db_path);
    const PatternDictionary dict = load_dictionary(dict_path);
    const AudioSignal sig = load_wav(query_wav);
    const TimeChromaImage img = image_of(sig, cfg);
    const auto fps = fingerprints_of(img, dict, cfg);
    const auto detections =
        detect(db, fps, sig.duration_s(), cfg.alpha, cfg.theta_max, cfg.identify_params());

    write_detections(out, detections);
    const int period = cfg.m * cfg.n;
    for (const auto& d : detections) {
        const SongInfo* song = db.find_song(d.song_id);
        log << "query [" << num(d.query_start) << ", " << num(d.query_end) << "] matches '"
            << (song ? song->title : "?") << "' [" << num(d.db_start()) << ", "
            << num(d.db_end()) << "]  tempo x" << num(1.0 / d.a) << "  pitch "
            << d.dp_signed(period) << " steps  (" << d.support << " features)\n";
    }
    if (detections.empty())
        log << "no copies detected\n";
    return detections;
}

namespace {

struct AttackLevel {
    std::string kind;
    double param = 0.0;
};

std::vector<AttackLevel> parse_attack_spec(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw IoError("cannot open attack spec " + path);
    std::vector<AttackLevel> levels;
    std::string line;
    while (std::getline(in, line)) {
        const auto hash = line.find('#');
        if (hash != std::string::npos)
            line.erase(hash);
        std::istringstream row(line);
        AttackLevel lvl;
        if (!(row >> lvl.kind))
            continue;
        if (lvl.kind != "none" && !(row >> lvl.param))
            throw ConfigError("attack spec line needs a parameter: " + line);
        if (lvl.kind != "none" && lvl.kind != "tempo" && lvl.kind != "pitch" &&
            lvl.kind != "speed" && lvl.kind != "noise")
            throw ConfigError("unknown attack kind '" + lvl.kind + "'");
        levels.push_back(lvl);
    }
    return levels;
}

struct CorpusSong {
    std::string file;
    uint64_t seed = 0;
    double length_s = 0.0;
    uint32_t db_id = 0;
};

std::vector<CorpusSong> load_manifest(const std::string& corpus_dir, const FingerprintDB& db) {
    std::ifstream in(fs::path(corpus_dir) / "manifest.tsv");
    if (!in)
        throw IoError("corpus manifest not found in " + corpus_dir +
                      " (generate the corpus with gen-corpus)");
    std::vector<CorpusSong> songs;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#')
            continue;
        std::istringstream row(line);
        CorpusSong s;
        if (!(row >> s.file >> s.seed >> s.length_s))
            throw ConfigError("bad manifest line: " + line);
        bool found = false;
        for (const auto& info : db.songs()) {
            if (info.title == s.file) {
                s.db_id = info.id;
                found = true;
                break;
            }
        }
        if (found)
            songs.push_back(s);
    }
    if (songs.empty())
        throw ConfigError("manifest has no songs that are present in the database");
    return songs;
}

} // namespace

std::vector<EvalLevel> cmd_evaluate(const std::string& db_path, const std::string& dict_path,
                                    const std::string& corpus_dir,
                                    const std::string& attack_spec_path,
                                    const std::string& out_dir, const Config& cfg,
                                    std::ostream& log) {
    const FingerprintDB db = FingerprintDB::load(db_path);
    const PatternDictionary dict = load_dictionary(dict_path);
    const auto levels = parse_attack_spec(attack_spec_path);
    const auto corpus = load_manifest(corpus_dir, db);
    const ChromaParams chroma = cfg.chroma();
    const int period = chroma.bins();
    fs::create_directories(out_dir);

    std::vector<SyntheticScore> scores;
    scores.reserve(corpus.size());
    for (const auto& s : corpus)
        scores.push_back(generate_song(s.seed, s.length_s, chroma).first);

    std::vector<EvalLevel> results;
    std::ofstream metrics(fs::path(out_dir) / "metrics.csv");
    metrics << "attack,param,snippets,song_rate,tempo_rate,pitch_rate,iou_ok_rate,mean_iou,"
               "pass_rate\n";

    for (std::size_t li = 0; li < levels.size(); ++li) {
        const auto& lvl = levels[li];
        std::mt19937_64 rng(static_cast<uint64_t>(cfg.eval_seed) * 0x9E3779B97F4A7C15ull + li);
        std::uniform_real_distribution<double> snip_len_d(cfg.eval_snip_min_s,
                                                          cfg.eval_snip_max_s);

        std::vector<MashupEntry> entries;
        std::size_t prev_song = corpus.size();
        for (int k = 0; k < cfg.eval_snippets; ++k) {
            std::uniform_int_distribution<std::size_t> song_d(0, corpus.size() - 1);
            std::size_t si = song_d(rng);
            if (corpus.size() > 1)
                while (si == prev_song)
                    si = song_d(rng);
            prev_song = si;
            const double len = snip_len_d(rng);
            std::uniform_real_distribution<double> start_d(0.0, corpus[si].length_s - len);
            const double t0 = start_d(rng);
            const double t1 = t0 + len;

            const SyntheticScore snippet = cut_score(scores[si], t0, t1);
            MashupEntry e;
            e.gap_before_s = cfg.eval_gap_s;
            e.song_id = corpus[si].db_id;
            e.db_start_s = t0;
            e.db_end_s = t1;
            if (lvl.kind == "tempo") {
                const SyntheticScore scaled = scale_score_time(snippet, lvl.param);
                e.signal = render_score(scaled, chroma, scaled.length_s);
                e.slope_a = 1.0 / lvl.param;
            } else if (lvl.kind == "pitch") {
                const int dp = static_cast<int>(std::lround(lvl.param));
                e.signal = render_score(shift_score(snippet, dp, chroma), chroma, len);
                e.slope_a = 1.0;
                e.dp = ((dp % period) + period) % period;
            } else if (lvl.kind == "speed") {
                e.signal = attack_speed(render_score(snippet, chroma, len), lvl.param);
                e.slope_a = 1.0 / lvl.param;
                const int dp = static_cast<int>(std::lround(chroma.m * std::log2(lvl.param)));
                e.dp = ((dp % period) + period) % period;
            } else if (lvl.kind == "noise") {
                e.signal = attack_noise(render_score(snippet, chroma, len), lvl.param, rng());
                e.slope_a = 1.0;
            } else {
                e.signal = render_score(snippet, chroma, len);
                e.slope_a = 1.0;
            }
            entries.push_back(std::move(e));
        }
        const Mashup mash = mashup(entries, cfg.fs);

        char stem[64];
        std::snprintf(stem, sizeof(stem), "query_%02zu_%s", li, lvl.kind.c_str());
        write_wav((fs::path(out_dir) / (std::string(stem) + ".wav")).string(), mash.signal);
        std::ofstream truth_out(fs::path(out_dir) / (std::string(stem) + "_truth.tsv"));
        truth_out << "# song_id\tquery_start\tquery_end\tdb_start\tdb_end\ta\tdp\n";
        for (const auto& row : mash.truth)
            truth_out << row.song_id << "\t" << num(row.query_start_s) << "\t"
                      << num(row.query_end_s) << "\t" << num(row.db_start_s) << "\t"
                      << num(row.db_end_s) << "\t" << num(row.a) << "\t" << row.dp << "\n";

        const TimeChromaImage img = image_of(mash.signal, cfg);
        const auto fps = fingerprints_of(img, dict, cfg);
        const auto detections = detect(db, fps, mash.signal.duration_s(), cfg.alpha,
                                       cfg.theta_max, cfg.identify_params());

        EvalLevel res;
        res.attack = lvl.kind;
        res.param = lvl.param;
        res.snippets = static_cast<int>(mash.truth.size());
        double iou_sum = 0.0;
        for (const auto& truth : mash.truth) {
            const Detection* best = nullptr;
            double best_overlap = 0.0;
            for (const auto& d : detections) {
                if (d.song_id != truth.song_id)
                    continue;
                const double ov = std::min(d.query_end, truth.query_end_s) -
                                  std::max(d.query_start, truth.query_start_s);
                if (ov > best_overlap) {
                    best_overlap = ov;
                    best = &d;
                }
            }
            if (!best)
                continue;
            res.song_rate += 1.0;
            const bool tempo_ok = std::abs(best->a - truth.a) < 0.01;
            const bool pitch_ok = best->dp == truth.dp;
            const double uni = std::max(best->query_end, truth.query_end_s) -
                               std::min(best->query_start, truth.query_start_s);
            const double iou = uni > 0.0 ? best_overlap / uni : 0.0;
            iou_sum += iou;
            if (tempo_ok)
                res.tempo_rate += 1.0;
            if (pitch_ok)
                res.pitch_rate += 1.0;
            if (iou >= 0.7)
                res.iou_ok_rate += 1.0;
            if (tempo_ok && pitch_ok && iou >= 0.7)
                res.pass_rate += 1.0;
        }
        const double n = static_cast<double>(res.snippets);
        res.song_rate /= n;
        res.tempo_rate /= n;
        res.pitch_rate /= n;
        res.iou_ok_rate /= n;
        res.mean_iou = iou_sum / n;
        res.pass_rate /= n;
        results.push_back(res);

        metrics << res.attack << "," << num(res.param) << "," << res.snippets << ","
                << num(res.song_rate) << "," << num(res.tempo_rate) << "," << num(res.pitch_rate)
                << "," << num(res.iou_ok_rate) << "," << num(res.mean_iou) << ","
                << num(res.pass_rate) << "\n";
        log << stem << ": song " << num(res.song_rate) << " tempo " << num(res.tempo_rate)
            << " pitch " << num(res.pitch_rate) << " iou>=0.7 " << num(res.iou_ok_rate)
            << " pass " << num(res.pass_rate) << "\n";
    }
    return results;
}

void cmd_dump_chroma(const std::string& wav_path, const std::string& out_csv, const Config& cfg) {
    const TimeChromaImage img = image_of(load_wav(wav_path), cfg);
    std::ofstream out(out_csv);
    if (!out)
        throw IoError("cannot create " + out_csv);
    for (std::size_t b = 0; b < img.num_bins; ++b) {
        for (std::size_t t = 0; t < img.num_frames; ++t) {
            if (t)
                out << ",";
            char buf[32];
            std::snprintf(buf, sizeof(buf), "%.9g", img.at(b, t));
            out << buf;
        }
        out << "\n";
    }
    if (!out)
        throw IoError("write failed: " + out_csv);
}

} // namespace tcfp
