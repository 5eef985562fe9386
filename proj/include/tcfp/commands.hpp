#pragma once

#include "tcfp/attacks.hpp"
#include "tcfp/config.hpp"
#include "tcfp/identify.hpp"

#include <iosfwd>
#include <string>
#include <vector>

namespace tcfp {

// Library-level command implementations; the CLI binary is a thin wrapper so
// everything here stays directly testable.

/// Front half of the pipeline: resample to the canonical rate, STFT, chroma.
TimeChromaImage image_of(const AudioSignal& sig, const Config& cfg);

/// Back half: feature detection and fingerprinting against a dictionary.
std::vector<Fingerprint> fingerprints_of(const TimeChromaImage& img,
                                         const PatternDictionary& dict, const Config& cfg);

/// Write `count` synthetic songs plus a manifest (file, seed, length) that
/// the evaluation harness uses to rebuild the scores.
void cmd_gen_corpus(const std::string& out_dir, int count, double length_s, uint64_t base_seed,
                    const Config& cfg);

/// Cluster corpus patches into the pattern dictionary and save it.
void cmd_build_dict(const std::string& corpus_dir, const std::string& out_path, uint64_t seed,
                    const Config& cfg, std::ostream& log);

/// Fingerprint every WAV in the corpus directory (sorted by name, duplicate
/// file contents skipped) into a database file.
void cmd_ingest(const std::string& corpus_dir, const std::string& dict_path,
                const std::string& db_path, const Config& cfg, std::ostream& log);

/// Run the detector on one query file; detection records go to `out`, a
/// human-readable summary to `log`.
std::vector<Detection> cmd_query(const std::string& db_path, const std::string& dict_path,
                                 const std::string& query_wav, const Config& cfg,
                                 std::ostream& out, std::ostream& log);

/// Per-attack-level metrics of the mash-up protocol.
struct EvalLevel {
    std::string attack; // none | tempo | pitch | speed | noise
    double param = 0.0;
    int snippets = 0;
    double song_rate = 0.0;   // correct song id detected
    double tempo_rate = 0.0;  // |a - a_true| < 0.01
    double pitch_rate = 0.0;  // dp exact
    double iou_ok_rate = 0.0; // interval IoU >= 0.7
    double mean_iou = 0.0;
    double pass_rate = 0.0;   // all of the above per snippet
};

/// Generate one attacked mash-up per spec line, run detection, score against
/// the recorded ground truth and write mash-up WAVs, ground-truth tables and
/// metrics.csv into out_dir.
std::vector<EvalLevel> cmd_evaluate(const std::string& db_path, const std::string& dict_path,
                                    const std::string& corpus_dir,
                                    const std::string& attack_spec_path,
                                    const std::string& out_dir, const Config& cfg,
                                    std::ostream& log);

/// Debug CSV dump (bins x frames) of a file's time-chroma image.
void cmd_dump_chroma(const std::string& wav_path, const std::string& out_csv, const Config& cfg);

/// One detection per line: song_id, query_start, query_end, db_start, db_end,
/// a, b, dp, support (tab-separated).
void write_detections(std::ostream& out, const std::vector<Detection>& detections);

} // namespace tcfp
