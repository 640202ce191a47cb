#include "cli.hpp"

#include <algorithm>
#include <csignal>
#include <iostream>
#include <limits>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "rawsea/error.hpp"
#include "review_server.hpp"
#include "stages.hpp"

namespace rawsea::cli {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

review::ReviewServer* g_server = nullptr;

extern "C" void on_signal(int) {
  if (g_server) g_server->stop();
}

fs::path manifest_for_file(const fs::path& out) { return out.parent_path() / (out.stem().string() + ".manifest.json"); }

fs::path manifest_for_dir(const fs::path& out) { return out / "manifest.json"; }

void report(std::ostream& err, bool as_json, const std::string& code, const std::string& message,
            const std::string& path, int exit_code) {
  if (as_json) {
    json j{{"error", code}, {"message", message}, {"exit_code", exit_code}};
    if (!path.empty()) j["path"] = path;
    err << j.dump() << '\n';
  } else {
    err << "rawsea: " << code << ": " << message;
    if (!path.empty()) err << " (at " << path << ")";
    err << '\n';
  }
}

bool json_errors_requested(const std::vector<std::string>& args) {
  return std::find(args.begin(), args.end(), "--json-errors") != args.end();
}

std::string strip_code(const Error& e) {
  const std::string prefix = std::string(to_string(e.code())) + ": ";
  const std::string what = e.what();
  return what.rfind(prefix, 0) == 0 ? what.substr(prefix.size()) : what;
}

struct ServeOptions {
  int port = 8080;
  std::string host = "127.0.0.1";
  fs::path annotations;
  fs::path granule_root;
  fs::path static_dir;
};

void run_serve(const ServeOptions& o, RunLog& log, std::ostream& out) {
  const auto paths = review::StorePaths::resolve(o.annotations);
  log.config = {{"host", o.host}, {"port", o.port}, {"annotations", paths.annotations.generic_string()}};
  log.inputs = {paths.annotations, paths.candidates};
  review::ReviewStore store(paths);
  review::ReviewServer server(store, o.granule_root,
                              o.static_dir.empty() ? std::nullopt : std::optional<fs::path>(o.static_dir));
  const int port = server.bind(o.host, o.port);
  write_manifest(paths.reviewed.parent_path() / (paths.annotations.stem().string() + ".review.manifest.json"),
                 "serve", log);
  out << "serving " << paths.annotations.string() << " on http://" << o.host << ":" << port << std::endl;
  g_server = &server;
  std::signal(SIGINT, on_signal);
  std::signal(SIGTERM, on_signal);
  server.run();
  g_server = nullptr;
  log.outputs = {paths.reviewed, paths.log};
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Vessel detection pipeline on raw multispectral granules", "rawsea"};
  app.require_subcommand(1);
  app.set_version_flag("--version", RAWSEA_VERSION);
  bool json_errors = false;
  app.add_flag("--json-errors", json_errors, "Print errors as JSON on stderr");

  RunLog log;
  std::string command;
  std::function<fs::path()> manifest_path;
  std::function<void()> action;

  RegisterOptions reg;
  auto* c_reg = app.add_subcommand("register", "Co-register the bands of each granule");
  c_reg->add_option("--granule", reg.granules, "Granule directory")->required()->check(CLI::ExistingDirectory);
  c_reg->add_option("--out", reg.out, "Output directory")->required();
  c_reg->add_option("--reference", reg.reference, "Reference band (default: first band)");
  c_reg->add_option("--mode", reg.mode, "estimate or lut")->check(CLI::IsMember({"estimate", "lut"}));
  c_reg->add_option("--table", reg.table, "Shift table JSON for lut mode")->check(CLI::ExistingFile);
  c_reg->add_option("--max-shift", reg.max_shift, "Search radius in pixels")->check(CLI::Range(0, 256));
  c_reg->callback([&] {
    action = [&] { run_register(reg, log); };
    manifest_path = [&] { return manifest_for_dir(reg.out); };
  });

  LabelOptions lab;
  auto* c_lab = app.add_subcommand("label", "Refine coarse boxes per band with threshold consensus");
  c_lab->add_option("--granule", lab.granule)->required()->check(CLI::ExistingDirectory);
  c_lab->add_option("--annotations", lab.annotations, "AISCOCO file with coarse boxes")->required()->check(CLI::ExistingFile);
  c_lab->add_option("--out", lab.out)->required();
  c_lab->add_option("--margin", lab.margin)->check(CLI::Range(0, 1024));
  c_lab->callback([&] {
    action = [&] { run_label(lab, log); };
    manifest_path = [&] { return manifest_for_file(lab.out); };
  });

  DetectOptions det;
  auto* c_det = app.add_subcommand("detect", "Detect bright vessels on one band");
  c_det->add_option("--granule", det.granules)->required()->check(CLI::ExistingDirectory);
  c_det->add_option("--band", det.band, "Band id (default: first band)");
  c_det->add_option("--out", det.out, "AISCOCO output")->required();
  c_det->add_option("--min-area", det.min_area);
  c_det->add_option("--max-area", det.max_area);
  c_det->add_option("--tile", det.tile);
  c_det->add_option("--overlap", det.overlap);
  c_det->add_option("--min-score", det.min_score);
  c_det->callback([&] {
    action = [&] { run_detect(det, log); };
    manifest_path = [&] { return manifest_for_file(det.out); };
  });

  MatchOptions mat;
  auto* c_mat = app.add_subcommand("match-ais", "Link detections to AIS tracks");
  c_mat->add_option("--annotations", mat.annotations)->required()->check(CLI::ExistingFile);
  c_mat->add_option("--granule-root", mat.granule_root)->required()->check(CLI::ExistingDirectory);
  c_mat->add_option("--ais", mat.ais, "AIS CSV")->required()->check(CLI::ExistingFile);
  c_mat->add_option("--mode", mat.mode)->check(CLI::IsMember({"dense", "daily"}));
  c_mat->add_option("--out", mat.out)->required();
  c_mat->add_option("--window", mat.window_s, "Temporal window in seconds");
  c_mat->add_option("--radius", mat.radius_m, "Footprint radius in meters");
  c_mat->add_option("--day-window", mat.day_window);
  c_mat->add_option("--max-cost", mat.max_cost_m, "Cost cutoff in meters");
  c_mat->callback([&] {
    action = [&] { run_match(mat, log); };
    manifest_path = [&] { return manifest_for_file(mat.out); };
  });

  EvaluateOptions ev;
  auto* c_ev = app.add_subcommand("evaluate", "Score predictions against truth with SIoU");
  c_ev->add_option("--pred", ev.pred)->required()->check(CLI::ExistingFile);
  c_ev->add_option("--truth", ev.truth)->required()->check(CLI::ExistingFile);
  c_ev->add_option("--siou-thresh", ev.siou_thresh);
  c_ev->add_option("--gamma", ev.gamma);
  c_ev->add_option("--kappa", ev.kappa);
  c_ev->add_option("--confusion", ev.confusion, "Confusion matrix JSON (rows truth)")->check(CLI::ExistingFile);
  c_ev->add_option("--out", ev.out, "Report JSON (default: stdout only)");
  c_ev->callback([&] {
    action = [&] {
      const json r = run_evaluate(ev, log);
      out << r.dump(2) << '\n';
    };
    manifest_path = [&] { return ev.out.empty() ? fs::path() : manifest_for_file(ev.out); };
  });

  BandReportOptions br;
  auto* c_br = app.add_subcommand("band-report", "Per-band statistics, dissimilarity and plots");
  c_br->add_option("--granule", br.granule)->required()->check(CLI::ExistingDirectory);
  c_br->add_option("--annotations", br.annotations)->required()->check(CLI::ExistingFile);
  c_br->add_option("--out", br.out, "Output directory")->required();
  c_br->add_option("--seed", br.seed);
  c_br->add_option("--sea-sample", br.sea_sample);
  c_br->add_flag("--refine", br.refine, "Refine boxes per band before measuring");
  c_br->callback([&] {
    action = [&] { run_band_report(br, log); };
    manifest_path = [&] { return manifest_for_dir(br.out); };
  });

  DegradeOptions deg;
  std::vector<std::string> snr_text;
  auto* c_deg = app.add_subcommand("degrade", "Simulate a coarser sensor and sweep detection quality");
  c_deg->add_option("--granule", deg.granules)->required()->check(CLI::ExistingDirectory);
  c_deg->add_option("--mtf", deg.mtf, "Target MTF values at Nyquist")->required();
  c_deg->add_option("--snr", snr_text, "SNR values ('inf' allowed)")->required();
  c_deg->add_option("--source-mtf", deg.source_mtf);
  c_deg->add_option("--kernel", deg.kernel_size, "PSF kernel size (odd)");
  c_deg->add_option("--dn-ref", deg.dn_ref);
  c_deg->add_option("--seed", deg.seed);
  c_deg->add_option("--truth", deg.truth, "AISCOCO truth for the sweep")->check(CLI::ExistingFile);
  c_deg->add_option("--band", deg.band);
  c_deg->add_flag("--write-granules", deg.write_granules);
  c_deg->add_option("--out", deg.out, "Output directory")->required();
  c_deg->callback([&] {
    for (const auto& s : snr_text) {
      if (s == "inf") {
        deg.snr.push_back(std::numeric_limits<double>::infinity());
        continue;
      }
      try {
        std::size_t used = 0;
        deg.snr.push_back(std::stod(s, &used));
        if (used != s.size()) throw std::invalid_argument(s);
      } catch (const std::exception&) {
        throw CLI::ValidationError("--snr", "'" + s + "' is not a number");
      }
    }
    action = [&] { run_degrade(deg, log); };
    manifest_path = [&] { return manifest_for_dir(deg.out); };
  });

  ServeOptions srv;
  auto* c_srv = app.add_subcommand("serve", "Serve the match-review API");
  c_srv->add_option("--port", srv.port)->check(CLI::Range(0, 65535));
  c_srv->add_option("--host", srv.host);
  c_srv->add_option("--annotations", srv.annotations, "Matched AISCOCO file (RAWSEA_STORE overrides)");
  c_srv->add_option("--granule-root", srv.granule_root)->required()->check(CLI::ExistingDirectory);
  c_srv->add_option("--static", srv.static_dir, "Directory served at /")->check(CLI::ExistingDirectory);
  c_srv->callback([&] {
    if (srv.annotations.empty() && !std::getenv("RAWSEA_STORE")) {
      throw CLI::RequiredError("--annotations (or RAWSEA_STORE)");
    }
    action = [&] { run_serve(srv, log, out); };
  });

  SynthOptions syn;
  auto* c_syn = app.add_subcommand("synth", "Generate synthetic granules, truth and AIS");
  c_syn->add_option("--count", syn.count)->check(CLI::Range(0, 100000));
  c_syn->add_option("--seed", syn.seed);
  c_syn->add_option("--width", syn.width)->check(CLI::Range(64, 8192));
  c_syn->add_option("--height", syn.height)->check(CLI::Range(64, 8192));
  c_syn->add_option("--snr", syn.snr, "Noise SNR (0: none)");
  c_syn->add_option("--shift", syn.shifts, "Band displacement BAND:DX:DY");
  c_syn->add_option("--out", syn.out)->required();
  c_syn->callback([&] {
    action = [&] { run_synth(syn, log); };
    manifest_path = [&] { return manifest_for_dir(syn.out); };
  });

  if (args.size() > 1 && !args[1].empty() && args[1][0] != '-' && !app.get_subcommand_no_throw(args[1])) {
    report(err, json_errors_requested(args), "UsageError", "unknown subcommand '" + args[1] + "'", {}, kUsageError);
    return kUsageError;
  }
  std::vector<std::string> rest(args.rbegin(), args.rend());
  if (!rest.empty()) rest.pop_back();
  try {
    app.parse(rest);
  } catch (const CLI::Success& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    report(err, json_errors, "UsageError", e.what(), {}, kUsageError);
    if (!json_errors) err << "Run with --help for usage.\n";
    return kUsageError;
  }

  command = app.get_subcommands().front()->get_name();
  try {
    action();
    if (manifest_path) {
      const fs::path m = manifest_path();
      if (!m.empty()) write_manifest(m, command, log);
    }
  } catch (const Error& e) {
    report(err, json_errors, std::string(to_string(e.code())), strip_code(e), e.path(), kDomainError);
    return kDomainError;
  } catch (const fs::filesystem_error& e) {
    report(err, json_errors, "Io", e.what(), {}, kDomainError);
    return kDomainError;
  } catch (const std::exception& e) {
    report(err, json_errors, "Internal", e.what(), {}, kDomainError);
    return kDomainError;
  }
  return kOk;
}

}  // namespace rawsea::cli
