#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "wpl/experiments.hpp"

namespace wpl {

inline constexpr const char* kVersion = "wpl 0.1.0";

std::uint64_t fnv1a64(std::string_view s);
std::string hash_tag(std::string_view body);  // "fnv1a64:<16 hex digits>"

struct RenderedExperiment {
    std::string jsonl, csv, svg;
    std::string hash;  // of the JSONL body (every line after the header)
};

RenderedExperiment render_experiment(const ExperimentResult& r);
// summary JSON for the suite, with config and hash
std::string render_suite(const SuiteReport& s);

// JSONL produced by render_experiment, parsed back; throws ConfigError on a bad header and
// NumericalError when the body hash does not match
struct ParsedRecords {
    nlohmann::json header;
    std::vector<nlohmann::json> lines;  // body objects
    bool hash_ok = false;
};
ParsedRecords parse_jsonl(const std::string& text);
// CSV and SVG rebuilt from a parsed record file
RenderedExperiment rerender(const ParsedRecords& pr);

// writes <stem>.jsonl, <stem>.csv, <stem>.svg under dir; returns the paths
std::vector<std::filesystem::path> write_experiment(const RenderedExperiment& r, const std::filesystem::path& dir,
                                                   const std::string& stem);

}  // namespace wpl
