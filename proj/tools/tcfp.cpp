// tcfp - time-chroma audio fingerprinting and copy detection CLI

#include "tcfp/commands.hpp"
#include "tcfp/errors.hpp"

#include <CLI11.hpp>

#include <cstdlib>
#include <fstream>
#include <iostream>

namespace {

constexpr int kExitUsage = 2;
constexpr int kExitData = 3;

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"time-chroma audio fingerprinting and copy detection"};
    app.require_subcommand(1);

    std::string config_path;
    if (const char* env = std::getenv("TCFP_CONFIG"))
        config_path = env;
    std::vector<std::string> overrides;
    app.add_option("--config", config_path, "flat key=value config file (env TCFP_CONFIG)");
    app.add_option("--set", overrides, "override one config key, e.g. --set alpha=0.5");

    auto* gen = app.add_subcommand("gen-corpus", "write a synthetic song corpus + manifest");
    std::string gen_dir;
    int gen_count = 25;
    double gen_len = 60.0;
    uint64_t gen_seed = 1;
    gen->add_option("dir", gen_dir, "output directory")->required();
    gen->add_option("--songs", gen_count, "number of songs");
    gen->add_option("--length", gen_len, "song length in seconds");
    gen->add_option("--seed", gen_seed, "base seed");

    auto* bd = app.add_subcommand("build-dict", "cluster corpus patches into a pattern dictionary");
    std::string bd_corpus, bd_out;
    uint64_t bd_seed = 1;
    bd->add_option("corpus", bd_corpus, "directory of WAV files")->required();
    bd->add_option("out", bd_out, "output dictionary file")->required();
    bd->add_option("--seed", bd_seed, "clustering seed");

    auto* ing = app.add_subcommand("ingest", "fingerprint a corpus into a database");
    std::string ing_corpus, ing_dict, ing_db;
    ing->add_option("corpus", ing_corpus, "directory of WAV files")->required();
    ing->add_option("dict", ing_dict, "dictionary file")->required();
    ing->add_option("db", ing_db, "output database file")->required();

    auto* qry = app.add_subcommand("query", "detect copied snippets in a query file");
    std::string qry_db, qry_dict, qry_wav;
    qry->add_option("db", qry_db, "database file")->required();
    qry->add_option("dict", qry_dict, "dictionary file")->required();
    qry->add_option("wav", qry_wav, "query WAV")->required();

    auto* ev = app.add_subcommand("evaluate", "run the attacked mash-up protocol");
    std::string ev_db, ev_dict, ev_corpus, ev_spec, ev_out;
    ev->add_option("db", ev_db, "database file")->required();
    ev->add_option("dict", ev_dict, "dictionary file")->required();
    ev->add_option("corpus", ev_corpus, "corpus directory (with manifest.tsv)")->required();
    ev->add_option("spec", ev_spec, "attack spec file, lines like 'tempo 1.2'")->required();
    ev->add_option("out", ev_out, "output directory")->required();

    auto* dump = app.add_subcommand("dump-chroma", "write a file's time-chroma image as CSV");
    std::string dump_wav, dump_csv;
    dump->add_option("wav", dump_wav, "input WAV")->required();
    dump->add_option("csv", dump_csv, "output CSV")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : kExitUsage;
    }

    try {
        tcfp::Config cfg;
        if (!config_path.empty())
            cfg = tcfp::load_config(config_path);
        for (const auto& kv : overrides)
            tcfp::config_set(cfg, kv);

        if (gen->parsed()) {
            tcfp::cmd_gen_corpus(gen_dir, gen_count, gen_len, gen_seed, cfg);
        } else if (bd->parsed()) {
            tcfp::cmd_build_dict(bd_corpus, bd_out, bd_seed, cfg, std::cout);
        } else if (ing->parsed()) {
            tcfp::cmd_ingest(ing_corpus, ing_dict, ing_db, cfg, std::cout);
        } else if (qry->parsed()) {
            tcfp::cmd_query(qry_db, qry_dict, qry_wav, cfg, std::cout, std::cerr);
        } else if (ev->parsed()) {
            tcfp::cmd_evaluate(ev_db, ev_dict, ev_corpus, ev_spec, ev_out, cfg, std::cout);
        } else if (dump->parsed()) {
            tcfp::cmd_dump_chroma(dump_wav, dump_csv, cfg);
        }
    } catch (const tcfp::ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitData;
    }
    return 0;
}
