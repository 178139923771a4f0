#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "deid/commands.hpp"

namespace {

// "rules:PATH" or "remote:URL" from the command line.
void apply_detector_flag(deid::PipelineConfig& cfg, const std::string& value) {
    if (value.rfind("rules:", 0) == 0) {
        cfg.rules_path = value.substr(6);
        cfg.remote_url.reset();
    } else if (value.rfind("remote:", 0) == 0) {
        cfg.remote_url = value.substr(7);
        cfg.rules_path.reset();
    } else {
        throw CLI::ValidationError("--detector", "expected rules:PATH or remote:URL");
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Radiology report de-identification pipeline"};
    app.require_subcommand(1);

    std::string config_path;
    std::string detector_flag;
    std::optional<std::uint64_t> seed;
    std::optional<int> runs;
    std::optional<std::size_t> max_len;
    std::optional<std::string> out_dir;
    std::optional<std::string> lexicons;

    app.add_option("--config", config_path, "pipeline config JSON file");
    app.add_option("--detector", detector_flag, "rules:PATH or remote:URL");
    app.add_option("--seed", seed, "random seed");
    app.add_option("--runs", runs, "number of de-identification runs");
    app.add_option("--max-len", max_len, "chunk token budget");
    app.add_option("--out-dir", out_dir, "output directory");
    app.add_option("--lexicons", lexicons, "surrogate lexicon JSON file");

    std::string in_path, out_path, deid_path;
    std::vector<std::string> fixture_dirs;

    auto* detect = app.add_subcommand("detect", "detect PHI and write PREDICTED spans");
    detect->add_option("--in", in_path, "input corpus JSONL")->required();
    detect->add_option("--out", out_path, "output corpus JSONL")->required();

    auto* deid_cmd = app.add_subcommand("deid", "write de-identified corpora with audit files");
    deid_cmd->add_option("--in", in_path, "input corpus JSONL")->required();

    auto* exp2 = app.add_subcommand("experiment2",
                                    "regenerate-and-evaluate: per-run metrics plus CI table");
    exp2->add_option("--in", in_path, "input corpus JSONL")->required();

    auto* vendor = app.add_subcommand("vendor-eval", "evaluate recorded vendor responses");
    vendor->add_option("--deid", deid_path, "de-identified corpus JSONL")->required();
    vendor->add_option("--fixtures", fixture_dirs, "vendor fixture directory (repeatable)")
        ->required();

    CLI11_PARSE(app, argc, argv);

    try {
        deid::PipelineConfig cfg;
        if (!config_path.empty()) cfg = deid::PipelineConfig::from_json_file(config_path);
        if (!detector_flag.empty()) apply_detector_flag(cfg, detector_flag);
        if (seed) cfg.seed = *seed;
        if (runs) cfg.runs = *runs;
        if (max_len) cfg.max_len = *max_len;
        if (out_dir) cfg.out_dir = *out_dir;
        if (lexicons) cfg.lexicons_path = *lexicons;

        if (detect->parsed()) return deid::cmd_detect(cfg, in_path, out_path);
        if (deid_cmd->parsed()) return deid::cmd_deid(cfg, in_path);
        if (exp2->parsed()) return deid::cmd_experiment2(cfg, in_path);
        if (vendor->parsed()) {
            std::vector<std::filesystem::path> dirs(fixture_dirs.begin(), fixture_dirs.end());
            return deid::cmd_vendor_eval(cfg, deid_path, dirs);
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 1;
}
