#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include "deid/commands.hpp"
#include "deid/corpus.hpp"
#include "doctest.h"
#include "json.hpp"

using namespace deid;
namespace fs = std::filesystem;

namespace {

fs::path data_dir() { return fs::path(DEID_DATA_DIR); }
fs::path fixture_dir() { return fs::path(DEID_FIXTURE_DIR); }

PipelineConfig base_config(const fs::path& out_dir) {
    PipelineConfig c;
    c.rules_path = data_dir() / "default_rules.json";
    c.lexicons_path = data_dir() / "lexicons.json";
    c.seed = 7;
    c.runs = 2;
    c.out_dir = out_dir;
    return c;
}

fs::path scratch_dir(const std::string& name) {
    fs::path p = fs::temp_directory_path() / ("deid_cmd_" + name);
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

std::string read_file(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

fs::path small_input(const fs::path& dir) {
    fs::path in = dir / "in.jsonl";
    Corpus c;
    c.reports.push_back(
        {"a", "Alice Abbott seen 01/23/2019 at Lakeside Medical Center.", {}, {}});
    c.reports.push_back({"b", "Dr Quimby called (650) 724-1234 about MRN-338271.", {}, {}});
    save_corpus(c, in);
    return in;
}

// Commands print human-readable summaries; swallow them during tests.
struct CoutCapture {
    std::ostringstream sink;
    std::streambuf* saved;
    CoutCapture() : saved(std::cout.rdbuf(sink.rdbuf())) {}
    ~CoutCapture() { std::cout.rdbuf(saved); }
    std::string text() const { return sink.str(); }
};

}  // namespace

TEST_CASE("pipeline config validation") {
    PipelineConfig c;
    SUBCASE("detector is required") { CHECK_THROWS(c.validate()); }
    SUBCASE("rules and remote are mutually exclusive") {
        c.rules_path = "r.json";
        c.remote_url = "http://x";
        CHECK_THROWS(c.validate());
    }
    SUBCASE("runs and max_len must be positive") {
        c.rules_path = "r.json";
        c.runs = 0;
        CHECK_THROWS(c.validate());
        c.runs = 1;
        c.max_len = 0;
        CHECK_THROWS(c.validate());
        c.max_len = 512;
        CHECK_NOTHROW(c.validate());
    }
}

TEST_CASE("pipeline config from json") {
    fs::path dir = scratch_dir("config");
    fs::path cfg = dir / "config.json";
    {
        std::ofstream out(cfg);
        out << R"({"max_len": 128, "seed": 9, "runs": 3,
                   "detector": {"rules": "rules.json"},
                   "lexicons": "lex.json", "ci_method": "bootstrap",
                   "out_dir": "results"})";
    }
    PipelineConfig c = PipelineConfig::from_json_file(cfg);
    CHECK(c.max_len == 128);
    CHECK(c.seed == 9);
    CHECK(c.runs == 3);
    CHECK(c.rules_path == fs::path("rules.json"));
    CHECK(!c.remote_url);
    CHECK(c.lexicons_path == fs::path("lex.json"));
    CHECK(c.ci_method == CiMethod::BOOTSTRAP);
    CHECK(c.out_dir == fs::path("results"));

    {
        std::ofstream out(cfg);
        out << R"({"ci_method": "magic"})";
    }
    CHECK_THROWS(PipelineConfig::from_json_file(cfg));
    CHECK_THROWS(PipelineConfig::from_json_file(dir / "missing.json"));
    fs::remove_all(dir);
}

TEST_CASE("cmd_detect writes a corpus with predictions") {
    fs::path dir = scratch_dir("detect");
    fs::path in = small_input(dir);
    fs::path out = dir / "out.jsonl";
    CoutCapture cap;
    REQUIRE(cmd_detect(base_config(dir), in, out) == 0);
    Corpus detected = load_corpus(out);
    REQUIRE(detected.reports.size() == 2);
    CHECK(!detected.reports[0].spans_with(Provenance::PREDICTED).empty());
    CHECK(!detected.reports[1].spans_with(Provenance::PREDICTED).empty());
    CHECK(cap.text().find("PATIENT") != std::string::npos);
    fs::remove_all(dir);
}

TEST_CASE("cmd_detect fails cleanly on a missing input") {
    fs::path dir = scratch_dir("detect_missing");
    CoutCapture cap;
    CHECK(cmd_detect(base_config(dir), dir / "nope.jsonl", dir / "out.jsonl") == 1);
    fs::remove_all(dir);
}

TEST_CASE("cmd_deid writes one corpus and audit file per run") {
    fs::path dir = scratch_dir("deid");
    fs::path in = small_input(dir);
    CoutCapture cap;
    REQUIRE(cmd_deid(base_config(dir), in) == 0);
    for (const char* run : {"run-000", "run-001"}) {
        fs::path corpus_path = dir / (std::string(run) + ".jsonl");
        fs::path audit_path = dir / (std::string(run) + ".audit.jsonl");
        REQUIRE(fs::exists(corpus_path));
        REQUIRE(fs::exists(audit_path));
        Corpus deid = load_corpus(corpus_path);
        REQUIRE(deid.reports.size() == 2);
        // PHI replaced, audit lines parse and never contain original PHI
        CHECK(deid.reports[0].text.find("Abbott") == std::string::npos);
        std::string audit = read_file(audit_path);
        CHECK(audit.find("Abbott") == std::string::npos);
        CHECK(audit.find("01/23/2019") == std::string::npos);
        std::istringstream lines(audit);
        std::string line;
        int n = 0;
        while (std::getline(lines, line)) {
            auto parsed = nlohmann::json::parse(line, nullptr, /*allow_exceptions=*/false);
            CHECK(!parsed.is_discarded());
            ++n;
        }
        CHECK(n == 2);
    }
    fs::remove_all(dir);
}

TEST_CASE("cmd_experiment2 writes per-run evals and a CI report") {
    fs::path dir = scratch_dir("exp2");
    fs::path in = small_input(dir);
    CoutCapture cap;
    REQUIRE(cmd_experiment2(base_config(dir), in) == 0);
    CHECK(fs::exists(dir / "run-000.eval.json"));
    CHECK(fs::exists(dir / "run-001.eval.json"));
    CHECK(fs::exists(dir / "ci_report.json"));
    auto ci = nlohmann::json::parse(read_file(dir / "ci_report.json"));
    CHECK(ci.at("runs") == 2);
    CHECK(cap.text().find("Overall") != std::string::npos);
    fs::remove_all(dir);
}

TEST_CASE("cmd_vendor_eval scores bundled fixtures") {
    fs::path dir = scratch_dir("vendor");
    PipelineConfig config = base_config(dir);
    fs::path deid_path = fixture_dir() / "deid_corpus.jsonl";
    std::vector<fs::path> dirs = {fixture_dir() / "gcp", fixture_dir() / "aws",
                                  fixture_dir() / "azure"};
    CoutCapture cap;
    REQUIRE(cmd_vendor_eval(config, deid_path, dirs) == 0);

    auto gcp = nlohmann::json::parse(read_file(dir / "vendor_gcp.eval.json"));
    auto aws = nlohmann::json::parse(read_file(dir / "vendor_aws.eval.json"));
    auto azure = nlohmann::json::parse(read_file(dir / "vendor_azure.eval.json"));

    // gcp and aws responses are perfect over their mapped categories
    CHECK(gcp.at("overall").at("f1").get<double>() == 1.0);
    CHECK(aws.at("overall").at("f1").get<double>() == 1.0);
    // aws cannot map VENDOR: the row is absent rather than scored zero
    CHECK(aws.at("classes").at("VENDOR").at("present") == false);
    CHECK(gcp.at("classes").at("VENDOR").at("present") == true);
    // azure misses the hospital in r1 (4 tokens)
    CHECK(azure.at("counts").at("HOSPITAL").at("fn") == 4);
    CHECK(azure.at("overall").at("f1").get<double>() < 1.0);
    // comparison table lists all three systems
    std::string table = cap.text();
    CHECK(table.find("gcp") != std::string::npos);
    CHECK(table.find("aws") != std::string::npos);
    CHECK(table.find("azure") != std::string::npos);

    SUBCASE("manifest naming a different corpus is rejected") {
        fs::path bad = dir / "bad";
        fs::create_directories(bad);
        std::ofstream(bad / "manifest.json")
            << R"({"vendor": "gcp", "corpus": "other.jsonl"})";
        CHECK(cmd_vendor_eval(config, deid_path, {bad}) == 1);
    }
    SUBCASE("missing response files are reported per report") {
        fs::path partial = dir / "partial";
        fs::create_directories(partial);
        std::ofstream(partial / "manifest.json")
            << R"({"vendor": "gcp", "corpus": "deid_corpus.jsonl"})";
        std::ostringstream err;
        std::streambuf* saved = std::cerr.rdbuf(err.rdbuf());
        int rc = cmd_vendor_eval(config, deid_path, {partial});
        std::cerr.rdbuf(saved);
        CHECK(rc == 1);
        CHECK(err.str().find("r1") != std::string::npos);
        CHECK(err.str().find("r3") != std::string::npos);
    }
    fs::remove_all(dir);
}
