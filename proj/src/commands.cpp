#include "deid/commands.hpp"

#include <fstream>
#include <iostream>
#include <sstream>

#include "deid/vendors.hpp"
#include "json.hpp"

namespace deid {

namespace fs = std::filesystem;

PipelineConfig PipelineConfig::from_json_file(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config file: " + path.string());
    nlohmann::json j = nlohmann::json::parse(in);
    PipelineConfig cfg;
    cfg.max_len = j.value("max_len", std::size_t{512});
    cfg.seed = j.value("seed", std::uint64_t{0});
    cfg.runs = j.value("runs", 50);
    if (j.contains("detector")) {
        const auto& d = j["detector"];
        if (d.contains("rules")) cfg.rules_path = d["rules"].get<std::string>();
        if (d.contains("remote")) cfg.remote_url = d["remote"].get<std::string>();
    }
    if (j.contains("lexicons")) cfg.lexicons_path = j["lexicons"].get<std::string>();
    if (j.contains("ci_method")) {
        std::string m = j["ci_method"].get<std::string>();
        if (m == "normal")
            cfg.ci_method = CiMethod::NORMAL;
        else if (m == "bootstrap")
            cfg.ci_method = CiMethod::BOOTSTRAP;
        else
            throw std::runtime_error("unknown ci_method '" + m + "'");
    }
    if (j.contains("out_dir")) cfg.out_dir = j["out_dir"].get<std::string>();
    return cfg;
}

void PipelineConfig::validate() const {
    if (runs < 1) throw std::runtime_error("config: runs must be >= 1");
    if (max_len < 1) throw std::runtime_error("config: max_len must be >= 1");
    if (rules_path.has_value() == remote_url.has_value())
        throw std::runtime_error("config: exactly one detector (rules or remote) required");
}

std::unique_ptr<Detector> PipelineConfig::make_detector() const {
    if (rules_path) return std::make_unique<RuleDetector>(RuleSet::load(*rules_path));
    return std::make_unique<RemoteDetector>(RemoteEndpoint{*remote_url});
}

SurrogateGenerator PipelineConfig::make_generator() const {
    if (!lexicons_path) throw std::runtime_error("config: lexicons path required for surrogation");
    return SurrogateGenerator::from_lexicon_file(*lexicons_path);
}

namespace {

void write_file(const fs::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open output file: " + path.string());
    out << content;
    if (!out) throw std::runtime_error("write failure: " + path.string());
}

std::string run_tag(int run) {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "run-%03d", run);
    return buf;
}

int fail(const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
}

}  // namespace

int cmd_detect(const PipelineConfig& config, const fs::path& in_path, const fs::path& out_path) {
    try {
        config.validate();
        Corpus corpus = load_corpus(in_path);
        auto detector = config.make_detector();
        Corpus detected = detect_corpus(corpus, *detector, config.max_len);
        save_corpus(detected, out_path);
        std::array<std::size_t, kNumCategories> span_counts{};
        for (const auto& r : detected.reports)
            for (const auto& s : r.spans)
                if (s.provenance == Provenance::PREDICTED)
                    ++span_counts[static_cast<std::size_t>(s.category)];
        std::cout << "detected spans per class:\n";
        for (PhiCategory c : kAllCategories)
            std::cout << "  " << to_string(c) << ": "
                      << span_counts[static_cast<std::size_t>(c)] << '\n';
        return 0;
    } catch (const std::exception& e) {
        return fail(e);
    }
}

int cmd_deid(const PipelineConfig& config, const fs::path& in_path) {
    try {
        config.validate();
        Corpus corpus = load_corpus(in_path);
        auto detector = config.make_detector();
        SurrogateGenerator generator = config.make_generator();
        Corpus detected = detect_corpus(corpus, *detector, config.max_len);
        fs::create_directories(config.out_dir);
        for (int run = 0; run < config.runs; ++run) {
            std::uint64_t run_seed = config.seed + static_cast<std::uint64_t>(run);
            Corpus deid;
            deid.name = corpus.name;
            std::ostringstream audit;
            for (const AnnotatedReport& report : detected.reports) {
                DeidResult res = apply_surrogates(
                    report, report.spans_with(Provenance::PREDICTED), run_seed, generator);
                audit << audit_line(report.id, res) << '\n';
                AnnotatedReport r;
                r.id = report.id;
                r.text = std::move(res.text);
                r.spans = std::move(res.spans);
                r.metadata = report.metadata;
                deid.reports.push_back(std::move(r));
            }
            save_corpus(deid, config.out_dir / (run_tag(run) + ".jsonl"));
            write_file(config.out_dir / (run_tag(run) + ".audit.jsonl"), audit.str());
        }
        std::cout << "wrote " << config.runs << " de-identified corpora to " << config.out_dir
                  << '\n';
        return 0;
    } catch (const std::exception& e) {
        return fail(e);
    }
}

int cmd_experiment2(const PipelineConfig& config, const fs::path& in_path) {
    try {
        config.validate();
        Corpus corpus = load_corpus(in_path);
        auto detector = config.make_detector();
        SurrogateGenerator generator = config.make_generator();

        std::vector<Corpus> deid_runs =
            deidentify_corpus(corpus, *detector, config.seed, config.runs, generator,
                              config.max_len);
        fs::create_directories(config.out_dir);
        std::vector<EvalReport> reports;
        reports.reserve(deid_runs.size());
        for (std::size_t run = 0; run < deid_runs.size(); ++run) {
            Corpus redetected = detect_corpus(deid_runs[run], *detector, config.max_len);
            EvalReport report = evaluate_corpus(redetected, redetected, Provenance::SYNTHETIC,
                                                Provenance::PREDICTED);
            write_file(config.out_dir / (run_tag(static_cast<int>(run)) + ".eval.json"),
                       eval_report_to_json(report) + "\n");
            reports.push_back(std::move(report));
        }
        CiReport ci = aggregate_runs(reports, config.ci_method);
        write_file(config.out_dir / "ci_report.json", ci_report_to_json(ci) + "\n");
        std::cout << render_ci_table(ci);
        return 0;
    } catch (const std::exception& e) {
        return fail(e);
    }
}

int cmd_vendor_eval(const PipelineConfig& config, const fs::path& deid_path,
                    const std::vector<fs::path>& fixture_dirs) {
    try {
        Corpus deid = load_corpus(deid_path);
        auto mappings = builtin_mappings();
        std::vector<std::pair<std::string, EvalReport>> systems;
        for (const fs::path& dir : fixture_dirs) {
            std::ifstream mf(dir / "manifest.json");
            if (!mf)
                throw std::runtime_error("cannot open manifest: " + (dir / "manifest.json").string());
            nlohmann::json manifest = nlohmann::json::parse(mf);
            std::string vendor = manifest.at("vendor").get<std::string>();
            std::string corpus_name = manifest.at("corpus").get<std::string>();
            if (fs::path(corpus_name).filename() != deid_path.filename())
                throw std::runtime_error("manifest in " + dir.string() + " names corpus '" +
                                         corpus_name + "', not '" + deid_path.filename().string() +
                                         "'");
            const VendorMapping* mapping = nullptr;
            for (const auto& m : mappings)
                if (m.vendor == vendor) mapping = &m;
            if (!mapping) throw std::runtime_error("unknown vendor '" + vendor + "' in manifest");

            std::map<std::string, std::vector<VendorSpan>> spans_by_report;
            std::vector<std::string> failures;
            for (const AnnotatedReport& r : deid.reports) {
                fs::path f = dir / (r.id + ".json");
                std::ifstream in(f);
                if (!in) {
                    failures.push_back(r.id + ": missing fixture " + f.string());
                    continue;
                }
                std::stringstream body;
                body << in.rdbuf();
                try {
                    if (vendor == "gcp")
                        spans_by_report[r.id] = parse_gcp_response(body.str(), r.text);
                    else if (vendor == "aws")
                        spans_by_report[r.id] = parse_aws_response(body.str(), r.text);
                    else
                        spans_by_report[r.id] = parse_azure_response(body.str(), r.text);
                } catch (const std::exception& e) {
                    failures.push_back(r.id + ": " + e.what());
                }
            }
            if (!failures.empty()) {
                std::cerr << "vendor fixture failures (" << vendor << "):\n";
                for (const auto& f : failures) std::cerr << "  " << f << '\n';
                return 1;
            }
            systems.emplace_back(vendor, evaluate_vendor(deid, spans_by_report, *mapping));
        }
        fs::create_directories(config.out_dir);
        for (const auto& [name, report] : systems)
            write_file(config.out_dir / ("vendor_" + name + ".eval.json"),
                       eval_report_to_json(report) + "\n");
        std::cout << render_comparison(systems);
        return 0;
    } catch (const std::exception& e) {
        return fail(e);
    }
}

}  // namespace deid
