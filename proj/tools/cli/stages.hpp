#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace rawsea::cli {

/// Everything a run manifest records besides the tool identity.
struct RunLog {
  nlohmann::json config = nlohmann::json::object();
  std::optional<std::uint64_t> seed;
  std::vector<std::filesystem::path> inputs;
  std::vector<std::filesystem::path> outputs;
};

/// {"tool","version","command","config","seed","inputs","outputs"}; every
/// file (directories are expanded, sorted) carries its byte count and
/// SHA-256. Contains no timestamps.
nlohmann::json make_manifest(const std::string& command, const RunLog& log);
void write_manifest(const std::filesystem::path& path, const std::string& command, const RunLog& log);
std::string sha256_file(const std::filesystem::path& path);

struct RegisterOptions {
  std::vector<std::filesystem::path> granules;
  std::filesystem::path out;
  std::string reference;  ///< empty: first band
  std::string mode = "estimate";
  std::filesystem::path table;
  int max_shift = 10;
};
void run_register(const RegisterOptions& o, RunLog& log);

struct LabelOptions {
  std::filesystem::path granule;
  std::filesystem::path annotations;
  std::filesystem::path out;
  int margin = 8;
};
void run_label(const LabelOptions& o, RunLog& log);

struct DetectOptions {
  std::vector<std::filesystem::path> granules;
  std::string band;  ///< empty: first band
  std::filesystem::path out;
  double min_area = 4.0;
  double max_area = 10000.0;
  int tile = 512;
  int overlap = 32;
  double min_score = 0.25;
};
void run_detect(const DetectOptions& o, RunLog& log);

struct MatchOptions {
  std::filesystem::path annotations;
  std::filesystem::path granule_root;
  std::filesystem::path ais;
  std::string mode = "dense";
  std::filesystem::path out;
  double window_s = 300.0;
  double radius_m = 300.0;
  int day_window = 1;
  double max_cost_m = 2000.0;
};
/// Writes <out>, plus <stem>.candidates.json, <stem>.decisions.jsonl and
/// <stem>.ais-rejects.json beside it.
void run_match(const MatchOptions& o, RunLog& log);

struct EvaluateOptions {
  std::filesystem::path pred;
  std::filesystem::path truth;
  double siou_thresh = 0.40;
  double gamma = 0.5;
  double kappa = 2.8284271247461903;
  std::filesystem::path confusion;
  std::filesystem::path out;
};
nlohmann::json run_evaluate(const EvaluateOptions& o, RunLog& log);

struct BandReportOptions {
  std::filesystem::path granule;
  std::filesystem::path annotations;
  std::filesystem::path out;
  std::uint64_t seed = 0;
  std::size_t sea_sample = 1000;
  bool refine = false;
};
void run_band_report(const BandReportOptions& o, RunLog& log);

struct DegradeOptions {
  std::vector<std::filesystem::path> granules;
  std::vector<double> mtf;
  std::vector<double> snr;
  double source_mtf = 0.3;
  int kernel_size = 7;
  double dn_ref = 100.0;
  std::uint64_t seed = 0;
  std::filesystem::path truth;
  std::string band;
  bool write_granules = false;
  std::filesystem::path out;
};
void run_degrade(const DegradeOptions& o, RunLog& log);

struct SynthOptions {
  int count = 20;
  std::uint64_t seed = 1;
  int width = 384;
  int height = 384;
  double snr = 0.0;  ///< <= 0: noise free
  std::vector<std::string> shifts;  ///< "B:dx:dy" content displacements
  std::filesystem::path out;
};
/// <out>/granules/<id>/, <out>/truth.json, <out>/ais.csv.
void run_synth(const SynthOptions& o, RunLog& log);

}  // namespace rawsea::cli
