#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "deid/detect.hpp"
#include "deid/eval.hpp"
#include "deid/surrogate.hpp"

namespace deid {

struct PipelineConfig {
    std::size_t max_len = 512;
    std::uint64_t seed = 0;
    int runs = 50;
    // Exactly one of the two; "rules:PATH" or "remote:URL" on the CLI.
    std::optional<std::filesystem::path> rules_path;
    std::optional<std::string> remote_url;
    std::optional<std::filesystem::path> lexicons_path;
    CiMethod ci_method = CiMethod::NORMAL;
    std::filesystem::path out_dir = "out";

    static PipelineConfig from_json_file(const std::filesystem::path& path);
    void validate() const;  // throws on violated invariants

    std::unique_ptr<Detector> make_detector() const;
    SurrogateGenerator make_generator() const;
};

// Command bodies behind the CLI; each returns a process exit status and
// reports errors on stderr. Outputs are deterministic functions of
// (inputs, config, seed).
int cmd_detect(const PipelineConfig& config, const std::filesystem::path& in_path,
               const std::filesystem::path& out_path);

int cmd_deid(const PipelineConfig& config, const std::filesystem::path& in_path);

int cmd_experiment2(const PipelineConfig& config, const std::filesystem::path& in_path);

int cmd_vendor_eval(const PipelineConfig& config, const std::filesystem::path& deid_path,
                    const std::vector<std::filesystem::path>& fixture_dirs);

}  // namespace deid
