// Copyright 2026 The mts Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Command-line front end over the C API.

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "mts/mts.h"

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

namespace {

struct Failure {
  int code;
  std::string message;
};

void check(mts_status s) {
  if (s == MTS_OK) return;
  const int code = s == MTS_ERR_IO ? 2 : 1;
  throw Failure{code, mts_last_error()};
}

template <typename T, void (*Free)(T*)>
struct Handle {
  T* p = nullptr;
  Handle() = default;
  Handle(const Handle&) = delete;
  Handle& operator=(const Handle&) = delete;
  ~Handle() {
    if (p) Free(p);
  }
  T** out() { return &p; }
  T* get() const { return p; }
};

using Config = Handle<mts_config, mts_config_free>;
using Dataset = Handle<mts_dataset, mts_dataset_free>;
using Features = Handle<mts_features, mts_features_free>;
using Selection = Handle<mts_selection, mts_selection_free>;
using Transform = Handle<mts_transform, mts_transform_free>;
using Model = Handle<mts_model, mts_model_free>;
using Predictions = Handle<mts_predictions, mts_predictions_free>;
using Weights = Handle<mts_weights, mts_weights_free>;
using Explanation = Handle<mts_explanation, mts_explanation_free>;

std::string take(char* s) {
  std::string out = s ? s : "";
  mts_string_free(s);
  return out;
}

std::string digest(const fs::path& p) {
  if (fs::is_directory(p)) {
    std::vector<fs::path> files;
    for (const auto& e : fs::recursive_directory_iterator(p)) {
      if (e.is_regular_file() && e.path().filename() != "manifest.json") files.push_back(e.path());
    }
    std::sort(files.begin(), files.end());
    json d = json::object();
    for (const auto& f : files) {
      char* h = nullptr;
      check(mts_file_digest(f.string().c_str(), &h));
      d[fs::relative(f, p).generic_string()] = take(h);
    }
    return d.dump();
  }
  char* h = nullptr;
  check(mts_file_digest(p.string().c_str(), &h));
  return take(h);
}

void write_text(const fs::path& p, const std::string& text) {
  std::ofstream f(p, std::ios::binary);
  if (!f) throw Failure{2, p.string() + ": cannot open for writing"};
  f << text;
  if (!f) throw Failure{2, p.string() + ": write failed"};
}

/// Options of one run, shared by every subcommand.
struct Run {
  std::string command;
  std::vector<std::string> argv;
  fs::path out;
  std::optional<std::string> config_path;
  std::uint64_t seed = 0;
  std::size_t threads = 0;
  std::vector<fs::path> inputs;
  std::vector<std::string> outputs;
  std::map<std::string, std::string> settings;
  Config cfg;  // config file plus command-line pipeline.* settings

  void input(const fs::path& p) {
    if (!fs::exists(p)) throw Failure{2, p.string() + ": no such file or directory"};
    inputs.push_back(p);
  }
  fs::path output(const std::string& name) {
    outputs.push_back(name);
    return out / name;
  }
  void set(const std::string& key, const std::string& value) {
    settings[key] = value;
    check(mts_config_set(cfg.get(), key.c_str(), value.c_str()));
  }
  void prepare_out() {
    std::error_code ec;
    fs::create_directories(out, ec);
    if (ec) throw Failure{2, out.string() + ": " + ec.message()};
  }
};

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string stem_name(const fs::path& p, const std::string& ext) { return p.stem().string() + ext; }

void write_manifest(Run& run, double seconds, std::time_t started) {
  json m;
  m["command"] = run.command;
  m["argv"] = run.argv;
  m["version"] = mts_version();
  m["seed"] = run.seed;
  m["threads"] = mts_threads();
  if (run.config_path) m["config_file"] = *run.config_path;
  char* rendered = nullptr;
  check(mts_config_render(run.cfg.get(), &rendered));
  m["config"] = take(rendered);
  m["settings"] = run.settings;
  json inputs = json::object();
  for (const auto& p : run.inputs) inputs[p.string()] = digest(p);
  m["inputs"] = inputs;
  m["outputs"] = run.outputs;
  char when[32];
  std::strftime(when, sizeof when, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&started));
  m["timing"] = {{"started", when}, {"seconds", seconds}};
  write_text(run.out / "manifest.json", m.dump(2) + "\n");
}

bool is_dataset(const fs::path& p) { return p.extension() == ".mtsl"; }

int case_mode(const std::string& mode) {
  if (mode.empty() || mode == "infer") return MTS_CASE_INFER;
  if (mode == "lower") return MTS_CASE_LOWER;
  if (mode == "upper") return MTS_CASE_UPPER;
  if (mode == "combined") return MTS_CASE_COMBINED;
  throw Failure{1, "unknown case mode '" + mode + "'"};
}

bool has_option(const CLI::App* app, const std::string& name) {
  if (app->get_option_no_throw("--" + name)) return true;
  for (const auto* sub : app->get_subcommands({})) {
    if (sub->get_option_no_throw("--" + name)) return true;
  }
  return false;
}

/// Appends `--name=value` for every `<command>.<name>` config entry whose
/// flag is absent from argv. Flags given on the command line win.
std::vector<std::string> merge_config(const std::vector<std::string>& argv, const CLI::App& app,
                                      const std::string& command, const std::string& config_text) {
  const CLI::App* sub = command.empty() ? nullptr : app.get_subcommand_no_throw(command);
  std::vector<std::string> out = argv;
  std::set<std::string> given;
  for (const auto& a : argv) {
    if (a.rfind("--", 0) == 0) given.insert(a.substr(2, a.find('=') - 2));
  }
  std::istringstream lines(config_text);
  std::string line;
  const std::string prefix = command + ".";
  while (std::getline(lines, line)) {
    const auto eq = line.find(" = ");
    if (eq == std::string::npos) continue;
    const std::string key = line.substr(0, eq);
    const std::string value = line.substr(eq + 3);
    std::string name;
    if (sub && key.rfind(prefix, 0) == 0) {
      name = key.substr(prefix.size());
      if (!has_option(sub, name)) continue;  // e.g. import.* keys read by the library
    } else if (key.rfind("run.", 0) == 0) {
      name = key.substr(4);
      if (!app.get_option_no_throw("--" + name)) continue;
    } else {
      continue;
    }
    if (given.count(name)) continue;
    if (value == "false") continue;
    out.push_back(value == "true" ? "--" + name : "--" + name + "=" + value);
  }
  return out;
}

struct PipelineFlags {
  std::optional<int> n_significant;
  std::optional<double> fdr_q;
  std::optional<std::string> scaling;
  std::optional<int> n_components;
  std::optional<int> n_quantiles;
  std::optional<std::size_t> k;
  std::optional<std::string> dtw_mode;
  std::optional<long> band_radius;
  bool no_znormalize = false;
  bool no_preprocess = false;
  bool no_highpass = false;
  bool no_trim = false;
  std::optional<double> cutoff_hz;
  std::optional<double> sampling_hz;
  std::optional<int> window;
  std::optional<std::size_t> min_len;
  std::optional<std::size_t> max_len;
  std::optional<double> auto_trim;

  void add_model(CLI::App* sub) {
    sub->add_option("--k", k, "Neighbors");
    sub->add_option("--dtw-mode", dtw_mode, "dependent or independent")->check(CLI::IsMember({"dependent", "independent"}));
    sub->add_option("--band-radius", band_radius, "Sakoe-Chiba radius");
    sub->add_flag("--no-znormalize", no_znormalize, "Keep raw scale for DTW references");
  }
  void add_features(CLI::App* sub) {
    sub->add_option("--n-significant", n_significant, "Minimum significant classes per feature");
    sub->add_option("--fdr-q", fdr_q, "Benjamini-Yekutieli level");
    sub->add_option("--scaling", scaling, "none, quantile, standardize, pca or nca");
    sub->add_option("--n-components", n_components, "PCA/LDA/NCA output dimension");
    sub->add_option("--n-quantiles", n_quantiles, "Quantile landmarks");
  }
  void add_preprocess(CLI::App* sub) {
    sub->add_flag("--no-preprocess", no_preprocess, "Skip filtering and trimming");
    sub->add_flag("--no-highpass", no_highpass, "Skip the high-pass filter");
    sub->add_flag("--no-trim", no_trim, "Keep every length");
    sub->add_option("--cutoff-hz", cutoff_hz, "High-pass cutoff");
    sub->add_option("--sampling-hz", sampling_hz, "Sampling rate");
    sub->add_option("--window", window, "Moving-average window (odd, <=1 disables)");
    sub->add_option("--min-len", min_len, "Shortest kept sample");
    sub->add_option("--max-len", max_len, "Longest kept sample");
    sub->add_option("--auto-trim", auto_trim, "Derive max-len as mu + k*sigma");
  }
  void apply(Run& run) const {
    auto put = [&](const char* key, const std::string& v) { run.set(std::string("pipeline.") + key, v); };
    if (n_significant) put("n_significant", std::to_string(*n_significant));
    if (fdr_q) put("fdr_q", fmt(*fdr_q));
    if (scaling) put("scaling", *scaling);
    if (n_components) put("n_components", std::to_string(*n_components));
    if (n_quantiles) put("n_quantiles", std::to_string(*n_quantiles));
    if (k) put("k", std::to_string(*k));
    if (dtw_mode) put("dtw_mode", *dtw_mode);
    if (band_radius) put("band_radius", *band_radius < 0 ? "none" : std::to_string(*band_radius));
    if (no_znormalize) put("znormalize", "false");
    if (no_preprocess) put("preprocess", "false");
    if (no_highpass) put("highpass", "false");
    if (no_trim) put("trim", "false");
    if (cutoff_hz) put("cutoff_hz", fmt(*cutoff_hz));
    if (sampling_hz) put("sampling_hz", fmt(*sampling_hz));
    if (window) put("window", std::to_string(*window));
    if (min_len) put("min_len", std::to_string(*min_len));
    if (max_len) put("max_len", std::to_string(*max_len));
    if (auto_trim) put("auto_trim", fmt(*auto_trim));
    put("seed", std::to_string(run.seed));
  }
};

void load_dataset(Run& run, const fs::path& p, Dataset& ds, int mode = MTS_CASE_INFER) {
  run.input(p);
  check(mts_dataset_read(p.string().c_str(), mode, ds.out()));
}

void load_features(Run& run, const fs::path& p, Features& fm) {
  run.input(p);
  check(mts_features_read(p.string().c_str(), fm.out()));
}

}  // namespace

int main(int argc, char** argv) {
  const auto t0 = std::chrono::steady_clock::now();
  const std::time_t started = std::time(nullptr);
  Run run;
  run.cfg.p = mts_config_new();
  std::vector<std::string> args(argv + 1, argv + argc);
  run.argv = args;

  CLI::App app{"Multivariate handwriting time-series classification"};
  app.require_subcommand(1);
  app.fallthrough();
  std::string config_path;
  std::string log_level = "info";
  app.add_option("--config", config_path, "Flat key = value configuration file");
  app.add_option("--seed", run.seed, "Seed for every stochastic step");
  app.add_option("--threads", run.threads, "Worker threads (default MTS_THREADS or all cores)");
  app.add_option("--log-level", log_level, "debug, info, warn or error")
      ->check(CLI::IsMember({"debug", "info", "warn", "error"}));

  // import
  auto* imp = app.add_subcommand("import", "Convert a long-format CSV into a dataset file");
  std::string imp_input, imp_out, imp_name = "dataset";
  imp->add_option("--input", imp_input, "Raw CSV")->required();
  imp->add_option("--out", imp_out, "Output directory")->required();
  imp->add_option("--name", imp_name, "Output dataset stem");

  // preprocess
  auto* pre = app.add_subcommand("preprocess", "Trim, high-pass filter and smooth a dataset");
  std::string pre_input, pre_out;
  PipelineFlags pre_flags;
  std::optional<int> pre_order;
  pre->add_option("--input", pre_input, "Dataset (.mtsl)")->required();
  pre->add_option("--out", pre_out, "Output directory")->required();
  pre->add_option("--order", pre_order, "Butterworth order");
  pre_flags.add_preprocess(pre);

  // stats
  auto* sta = app.add_subcommand("stats", "Length statistics of a dataset");
  std::string sta_input, sta_out;
  sta->add_option("--input", sta_input, "Dataset (.mtsl)")->required();
  sta->add_option("--out", sta_out, "Output directory")->required();

  // extract
  auto* ext = app.add_subcommand("extract", "Compute the feature catalog for a dataset");
  std::string ext_input, ext_out;
  bool ext_catalog = false;
  ext->add_option("--input", ext_input, "Dataset (.mtsl)");
  ext->add_option("--out", ext_out, "Output directory")->required();
  ext->add_flag("--catalog", ext_catalog, "Write the descriptor list instead");

  // select
  auto* sel = app.add_subcommand("select", "Hypothesis-test feature selection");
  std::string sel_input, sel_out, sel_case;
  std::vector<std::string> sel_apply;
  int sel_nsig = 17;
  double sel_q = 0.05;
  sel->add_option("--input", sel_input, "Training feature matrix")->required();
  sel->add_option("--apply", sel_apply, "Further matrices to project");
  sel->add_option("--out", sel_out, "Output directory")->required();
  sel->add_option("--n-significant", sel_nsig, "Minimum significant classes per feature");
  sel->add_option("--fdr-q", sel_q, "Benjamini-Yekutieli level");
  sel->add_option("--case-mode", sel_case, "lower, upper, combined or infer");

  // transform
  auto* tra = app.add_subcommand("transform", "Fit a feature transform and apply it");
  std::string tra_input, tra_out, tra_kind = "quantile";
  std::vector<std::string> tra_apply;
  std::optional<int> tra_ncomp, tra_nq;
  tra->add_option("--input", tra_input, "Training feature matrix")->required();
  tra->add_option("--apply", tra_apply, "Further matrices to transform");
  tra->add_option("--out", tra_out, "Output directory")->required();
  tra->add_option("--kind", tra_kind, "quantile, standardize, pca, lda or nca")
      ->check(CLI::IsMember({"quantile", "standardize", "pca", "lda", "nca"}));
  tra->add_option("--n-components", tra_ncomp, "Output dimension for pca/lda/nca");
  tra->add_option("--n-quantiles", tra_nq, "Quantile landmarks");

  // fit
  auto* fit = app.add_subcommand("fit", "Fit a kNN model or an end-to-end pipeline");
  std::string fit_input, fit_out, fit_distance = "euclidean", fit_pipeline, fit_case, fit_name;
  PipelineFlags fit_flags;
  fit->add_option("--input", fit_input, "Feature matrix (.csv) or dataset (.mtsl)")->required();
  fit->add_option("--out", fit_out, "Output directory")->required();
  fit->add_option("--distance", fit_distance, "euclidean or dtw")->check(CLI::IsMember({"euclidean", "dtw"}));
  fit->add_option("--pipeline", fit_pipeline, "Fit a full pipeline: features or dtw")
      ->check(CLI::IsMember({"features", "dtw"}));
  fit->add_option("--case-mode", fit_case, "lower, upper, combined or infer");
  fit->add_option("--name", fit_name, "Model id recorded in predictions");
  fit_flags.add_model(fit);
  fit_flags.add_features(fit);
  fit_flags.add_preprocess(fit);

  // predict
  auto* prd = app.add_subcommand("predict", "Class probabilities for a feature matrix or dataset");
  std::string prd_model, prd_input, prd_out, prd_id;
  prd->add_option("--model", prd_model, "Model file or directory")->required();
  prd->add_option("--input", prd_input, "Feature matrix (.csv) or dataset (.mtsl)")->required();
  prd->add_option("--out", prd_out, "Output directory")->required();
  prd->add_option("--model-id", prd_id, "Model id column value");

  // ensemble
  auto* ens = app.add_subcommand("ensemble", "Combine prediction tensors by voting");
  std::vector<std::string> ens_preds;
  std::string ens_out, ens_scheme = "weighted-soft", ens_weights, ens_models = "all", ens_id, ens_truth, ens_case;
  ens->add_option("--predictions", ens_preds, "Prediction tensors (merged in order)")->required();
  ens->add_option("--out", ens_out, "Output directory")->required();
  ens->add_option("--scheme", ens_scheme, "plurality, weighted, soft or weighted-soft")
      ->check(CLI::IsMember({"plurality", "weighted", "soft", "weighted-soft"}));
  ens->add_option("--weights", ens_weights, "model_id,weight CSV (default: tier weights)");
  ens->add_option("--models", ens_models, "top3, top4, all or a comma-separated list");
  ens->add_option("--model-id", ens_id, "Id of the combined model");
  ens->add_option("--truth", ens_truth, "Dataset with true labels for an accuracy report");
  ens->add_option("--case-mode", ens_case, "Alphabet of the tensors");

  // analyze
  auto* ana = app.add_subcommand("analyze", "Accuracy, prediction-space and failure-space reports");
  ana->require_subcommand(1);
  std::string ana_preds, ana_truth, ana_out, ana_class, ana_anchor, ana_case;
  auto add_common = [&](CLI::App* a) {
    a->add_option("--predictions", ana_preds, "Prediction tensor")->required();
    a->add_option("--truth", ana_truth, "Dataset with the true labels")->required();
    a->add_option("--out", ana_out, "Output directory")->required();
    a->add_option("--case-mode", ana_case, "Alphabet of the tensor");
  };
  auto* ana_acc = ana->add_subcommand("accuracy", "Per-model accuracy and confusion matrices");
  add_common(ana_acc);
  auto* ana_ps = ana->add_subcommand("prediction-space", "Model x sample correctness for one class");
  add_common(ana_ps);
  ana_ps->add_option("--class", ana_class, "True class symbol")->required();
  auto* ana_fail = ana->add_subcommand("failure", "Anchor failures rescued by the other models");
  add_common(ana_fail);
  ana_fail->add_option("--anchor", ana_anchor, "Anchor model id")->required();

  // sweep
  auto* swp = app.add_subcommand("sweep", "Accuracy over a hyperparameter grid");
  std::string swp_param, swp_grid, swp_out, swp_kind = "features";
  std::vector<std::string> swp_train, swp_test;
  PipelineFlags swp_flags;
  swp->add_option("--param", swp_param, "n_significant, n_components, k or band_radius")
      ->required()
      ->check(CLI::IsMember({"n_significant", "n_components", "k", "band_radius"}));
  swp->add_option("--grid", swp_grid, "a:b, a:b:step or a comma-separated list")->required();
  swp->add_option("--train", swp_train, "Training dataset per fold")->required();
  swp->add_option("--test", swp_test, "Test dataset per fold")->required();
  swp->add_option("--out", swp_out, "Output directory")->required();
  swp->add_option("--kind", swp_kind, "features or dtw")->check(CLI::IsMember({"features", "dtw"}));
  swp_flags.add_model(swp);
  swp_flags.add_features(swp);
  swp_flags.add_preprocess(swp);

  // explain
  auto* exl = app.add_subcommand("explain", "Time-slice attribution for one sample");
  std::string exl_model, exl_input, exl_sample, exl_out, exl_replacement = "mean";
  std::size_t exl_slices = 20, exl_top = 30, exl_perturb = 1000;
  exl->add_option("--model", exl_model, "Pipeline model directory")->required();
  exl->add_option("--input", exl_input, "Dataset holding the sample")->required();
  exl->add_option("--sample", exl_sample, "Sample id")->required();
  exl->add_option("--out", exl_out, "Output directory")->required();
  exl->add_option("--slices", exl_slices, "Slices per channel");
  exl->add_option("--top", exl_top, "Entries reported");
  exl->add_option("--perturbations", exl_perturb, "Random masks");
  exl->add_option("--replacement", exl_replacement, "mean, zero or noise")
      ->check(CLI::IsMember({"mean", "zero", "noise"}));

  try {
    // The config file is read before parsing so its entries can fill in
    // flags missing from argv.
    std::string command;
    std::string config_text;
    for (std::size_t i = 0; i < args.size(); ++i) {
      if (args[i] == "--config" && i + 1 < args.size()) config_path = args[i + 1];
      if (args[i].rfind("--config=", 0) == 0) config_path = args[i].substr(9);
    }
    for (const auto& a : args) {
      if (a.rfind("--", 0) == 0) continue;
      for (const auto* sub : app.get_subcommands({})) {
        if (sub->get_name() == a) command = a;
      }
      if (!command.empty()) break;
    }
    if (!config_path.empty()) {
      mts_config_free(run.cfg.p);
      run.cfg.p = nullptr;
      check(mts_config_load(config_path.c_str(), run.cfg.out()));
      char* text = nullptr;
      check(mts_config_render(run.cfg.get(), &text));
      config_text = take(text);
      run.config_path = config_path;
    }
    std::vector<std::string> merged = merge_config(args, app, command, config_text);
    std::reverse(merged.begin(), merged.end());
    app.parse(merged);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  } catch (const Failure& f) {
    std::fprintf(stderr, "error\tcli\t%s\n", f.message.c_str());
    return f.code;
  }

  int level = 1;
  if (log_level == "debug") level = 0;
  if (log_level == "warn") level = 2;
  if (log_level == "error") level = 3;
  mts_set_log_level(level);
  std::size_t threads = run.threads;
  if (threads == 0) {
    if (const char* env = std::getenv("MTS_THREADS")) threads = static_cast<std::size_t>(std::strtoul(env, nullptr, 10));
  }
  mts_set_threads(threads);

  try {
    if (imp->parsed()) {
      run.command = "import";
      run.out = imp_out;
      run.input(imp_input);
      run.prepare_out();
      Dataset ds;
      check(mts_dataset_import(run.cfg.get(), imp_input.c_str(), ds.out()));
      check(mts_dataset_write(ds.get(), run.output(imp_name + ".mtsl").string().c_str()));
      std::cerr << "info\tcli\timported " << mts_dataset_size(ds.get()) << " samples\n";
    } else if (pre->parsed()) {
      run.command = "preprocess";
      run.out = pre_out;
      Dataset ds;
      load_dataset(run, pre_input, ds);
      run.prepare_out();
      mts_preprocess_options o;
      mts_preprocess_options_default(&o);
      if (pre_flags.no_highpass) o.apply_highpass = 0;
      if (pre_flags.no_trim) o.apply_trim = 0;
      if (pre_flags.cutoff_hz) o.cutoff_hz = *pre_flags.cutoff_hz;
      if (pre_flags.sampling_hz) o.sampling_hz = *pre_flags.sampling_hz;
      if (pre_order) o.order = *pre_order;
      if (pre_flags.window) o.window = *pre_flags.window;
      if (pre_flags.min_len) o.min_len = *pre_flags.min_len;
      if (pre_flags.max_len) o.max_len = *pre_flags.max_len;
      if (pre_flags.auto_trim) o.auto_trim_k = *pre_flags.auto_trim;
      run.settings = {{"highpass", std::to_string(o.apply_highpass)}, {"cutoff_hz", fmt(o.cutoff_hz)},
                      {"sampling_hz", fmt(o.sampling_hz)},           {"order", std::to_string(o.order)},
                      {"window", std::to_string(o.window)},         {"trim", std::to_string(o.apply_trim)},
                      {"min_len", std::to_string(o.min_len)},       {"max_len", std::to_string(o.max_len)},
                      {"auto_trim", fmt(o.auto_trim_k)}};
      Dataset outds;
      char* discarded = nullptr;
      check(mts_dataset_preprocess(ds.get(), &o, outds.out(), &discarded));
      write_text(run.output("discarded.csv"), take(discarded));
      check(mts_dataset_write(outds.get(), run.output(fs::path(pre_input).filename().string()).string().c_str()));
    } else if (sta->parsed()) {
      run.command = "stats";
      run.out = sta_out;
      Dataset ds;
      load_dataset(run, sta_input, ds);
      run.prepare_out();
      double mu = 0, sigma = 0;
      std::size_t n = 0;
      check(mts_dataset_stats(ds.get(), &mu, &sigma, &n));
      std::printf("mu=%s sigma=%s n=%zu\n", fmt(mu).c_str(), fmt(sigma).c_str(), n);
      write_text(run.output("stats.csv"), "n,mu,sigma\n" + std::to_string(n) + "," + fmt(mu) + "," + fmt(sigma) + "\n");
    } else if (ext->parsed()) {
      run.command = "extract";
      run.out = ext_out;
      if (ext_catalog) {
        run.prepare_out();
        char* text = nullptr;
        check(mts_catalog(&text));
        write_text(run.output("catalog.txt"), take(text));
      } else {
        if (ext_input.empty()) throw Failure{1, "extract: --input is required"};
        Dataset ds;
        load_dataset(run, ext_input, ds);
        run.prepare_out();
        Features fm;
        check(mts_features_extract(ds.get(), fm.out()));
        check(mts_features_write(fm.get(), run.output(stem_name(ext_input, ".csv")).string().c_str()));
      }
    } else if (sel->parsed()) {
      run.command = "select";
      run.out = sel_out;
      Features train;
      load_features(run, sel_input, train);
      run.prepare_out();
      run.settings = {{"n_significant", std::to_string(sel_nsig)}, {"fdr_q", fmt(sel_q)}};
      Selection s;
      check(mts_select(train.get(), case_mode(sel_case), sel_nsig, sel_q, s.out()));
      check(mts_selection_write(s.get(), run.output("selection.csv").string().c_str()));
      std::set<std::string> names{"selection.csv"};
      std::vector<std::string> all{sel_input};
      all.insert(all.end(), sel_apply.begin(), sel_apply.end());
      for (std::size_t i = 0; i < all.size(); ++i) {
        const std::string name = fs::path(all[i]).filename().string();
        if (!names.insert(name).second) throw Failure{1, "output name collision: " + name};
        Features in;
        if (i == 0) {
          check(mts_selection_project(s.get(), train.get(), in.out()));
        } else {
          Features raw;
          load_features(run, all[i], raw);
          check(mts_selection_project(s.get(), raw.get(), in.out()));
        }
        check(mts_features_write(in.get(), run.output(name).string().c_str()));
      }
      std::cerr << "info\tcli\tselected " << mts_selection_count(s.get()) << " features\n";
    } else if (tra->parsed()) {
      run.command = "transform";
      run.out = tra_out;
      Features train;
      load_features(run, tra_input, train);
      run.prepare_out();
      run.settings["kind"] = tra_kind;
      if (tra_ncomp) run.set("pipeline.n_components", std::to_string(*tra_ncomp));
      if (tra_nq) run.set("pipeline.n_quantiles", std::to_string(*tra_nq));
      Transform t;
      check(mts_transform_fit(train.get(), tra_kind.c_str(), run.cfg.get(), run.seed, t.out()));
      check(mts_transform_save(t.get(), (run.out / "transform").string().c_str()));
      run.outputs.push_back("transform/");
      std::set<std::string> names;
      std::vector<std::string> all{tra_input};
      all.insert(all.end(), tra_apply.begin(), tra_apply.end());
      for (std::size_t i = 0; i < all.size(); ++i) {
        const std::string name = fs::path(all[i]).filename().string();
        if (!names.insert(name).second) throw Failure{1, "output name collision: " + name};
        Features raw;
        if (i == 0) {
          Features out;
          check(mts_transform_apply(t.get(), train.get(), out.out()));
          check(mts_features_write(out.get(), run.output(name).string().c_str()));
          continue;
        }
        load_features(run, all[i], raw);
        Features out;
        check(mts_transform_apply(t.get(), raw.get(), out.out()));
        check(mts_features_write(out.get(), run.output(name).string().c_str()));
      }
    } else if (fit->parsed()) {
      run.command = "fit";
      run.out = fit_out;
      run.prepare_out();
      Model m;
      if (!fit_pipeline.empty()) {
        Dataset ds;
        load_dataset(run, fit_input, ds);
        fit_flags.apply(run);
        if (!fit_name.empty()) run.set("pipeline.name", fit_name);
        run.settings["pipeline"] = fit_pipeline;
        check(mts_model_fit_pipeline(ds.get(), fit_pipeline.c_str(), run.cfg.get(), m.out()));
        check(mts_model_save(m.get(), run.output("model").string().c_str()));
      } else {
        mts_knn_options o;
        mts_knn_options_default(&o);
        if (fit_flags.k) o.k = *fit_flags.k;
        if (fit_flags.dtw_mode) o.dtw_independent = *fit_flags.dtw_mode == "independent";
        if (fit_flags.band_radius) o.band_radius = *fit_flags.band_radius;
        if (fit_flags.no_znormalize) o.znormalize = 0;
        run.settings = {{"distance", fit_distance}, {"k", std::to_string(o.k)},
                        {"dtw_independent", std::to_string(o.dtw_independent)},
                        {"band_radius", std::to_string(o.band_radius)}, {"znormalize", std::to_string(o.znormalize)}};
        if (fit_distance == "dtw") {
          Dataset ds;
          load_dataset(run, fit_input, ds);
          check(mts_model_fit_dtw(ds.get(), &o, m.out()));
        } else {
          if (is_dataset(fit_input)) throw Failure{1, "euclidean kNN fits on a feature matrix (.csv)"};
          Features fm;
          load_features(run, fit_input, fm);
          check(mts_model_fit_features(fm.get(), case_mode(fit_case), &o, m.out()));
        }
        check(mts_model_save(m.get(), run.output("model.jsonl").string().c_str()));
      }
    } else if (prd->parsed()) {
      run.command = "predict";
      run.out = prd_out;
      run.input(prd_model);
      Model m;
      check(mts_model_load(prd_model.c_str(), m.out()));
      run.prepare_out();
      Predictions pm;
      const char* id = prd_id.empty() ? nullptr : prd_id.c_str();
      if (is_dataset(prd_input)) {
        Dataset ds;
        load_dataset(run, prd_input, ds);
        check(mts_model_predict_dataset(m.get(), ds.get(), id, pm.out()));
      } else {
        Features fm;
        load_features(run, prd_input, fm);
        check(mts_model_predict_features(m.get(), fm.get(), id, pm.out()));
      }
      check(mts_predictions_write(pm.get(), run.output("predictions.csv").string().c_str(), 1));
    } else if (ens->parsed()) {
      run.command = "ensemble";
      run.out = ens_out;
      Predictions merged;
      for (const auto& p : ens_preds) {
        run.input(p);
        Predictions next;
        check(mts_predictions_read(p.c_str(), case_mode(ens_case), next.out()));
        if (!merged.get()) {
          std::swap(merged.p, next.p);
        } else {
          Predictions both;
          check(mts_predictions_merge(merged.get(), next.get(), both.out()));
          std::swap(merged.p, both.p);
        }
      }
      run.prepare_out();
      Weights w;
      if (!ens_weights.empty()) {
        run.input(ens_weights);
        check(mts_weights_read(ens_weights.c_str(), w.out()));
      }
      run.settings = {{"scheme", ens_scheme}, {"models", ens_models}};
      const std::string id = ens_id.empty() ? ens_scheme : ens_id;
      Predictions out;
      check(mts_ensemble(merged.get(), ens_scheme.c_str(), w.get(), ens_models.c_str(), id.c_str(), out.out()));
      check(mts_predictions_write(out.get(), run.output("ensemble.csv").string().c_str(), 1));
      if (!ens_truth.empty()) {
        Dataset truth;
        load_dataset(run, ens_truth, truth);
        Predictions all;
        check(mts_predictions_merge(merged.get(), out.get(), all.out()));
        check(mts_analyze_accuracy(all.get(), truth.get(), run.out.string().c_str()));
        run.outputs.push_back("accuracy.csv");
      }
    } else if (ana->parsed()) {
      run.out = ana_out;
      Predictions pm;
      run.input(ana_preds);
      check(mts_predictions_read(ana_preds.c_str(), case_mode(ana_case), pm.out()));
      Dataset truth;
      load_dataset(run, ana_truth, truth);
      run.prepare_out();
      if (ana_acc->parsed()) {
        run.command = "analyze accuracy";
        check(mts_analyze_accuracy(pm.get(), truth.get(), ana_out.c_str()));
        run.outputs.push_back("accuracy.csv");
      } else if (ana_ps->parsed()) {
        run.command = "analyze prediction-space";
        run.settings["class"] = ana_class;
        check(mts_analyze_prediction_space(pm.get(), truth.get(), ana_class.c_str(), ana_out.c_str()));
        run.outputs = {"prediction_space.csv", "prediction_space.pgm"};
      } else {
        run.command = "analyze failure";
        run.settings["anchor"] = ana_anchor;
        check(mts_analyze_failure(pm.get(), truth.get(), ana_anchor.c_str(), ana_out.c_str()));
        run.outputs = {"failure_rescue.csv"};
      }
    } else if (swp->parsed()) {
      run.command = "sweep";
      run.out = swp_out;
      if (swp_train.size() != swp_test.size()) throw Failure{1, "sweep: --train and --test counts differ"};
      for (const auto& p : swp_train) run.input(p);
      for (const auto& p : swp_test) run.input(p);
      run.prepare_out();
      swp_flags.apply(run);
      run.settings["param"] = swp_param;
      run.settings["grid"] = swp_grid;
      run.settings["kind"] = swp_kind;
      std::vector<const char*> tr, te;
      for (const auto& p : swp_train) tr.push_back(p.c_str());
      for (const auto& p : swp_test) te.push_back(p.c_str());
      check(mts_sweep(swp_param.c_str(), swp_grid.c_str(), tr.data(), te.data(), tr.size(), swp_kind.c_str(),
                      run.cfg.get(), swp_out.c_str()));
      run.outputs.push_back("sweep.csv");
    } else if (exl->parsed()) {
      run.command = "explain";
      run.out = exl_out;
      run.input(exl_model);
      Model m;
      check(mts_model_load(exl_model.c_str(), m.out()));
      Dataset ds;
      load_dataset(run, exl_input, ds);
      run.prepare_out();
      mts_explain_options o;
      mts_explain_options_default(&o);
      o.n_slices = exl_slices;
      o.top_k = exl_top;
      o.n_perturbations = exl_perturb;
      o.seed = run.seed;
      o.replacement = exl_replacement.c_str();
      run.settings = {{"sample", exl_sample},          {"slices", std::to_string(exl_slices)},
                      {"top", std::to_string(exl_top)}, {"perturbations", std::to_string(exl_perturb)},
                      {"replacement", exl_replacement}};
      Explanation e;
      check(mts_explain(m.get(), ds.get(), exl_sample.c_str(), &o, e.out()));
      check(mts_explanation_write(e.get(), exl_out.c_str()));
      run.outputs = {"explanation.csv",          "overlay.csv",          "overlay_positive.csv",
                     "overlay_negative.csv",     "overlay_positive.pgm", "overlay_negative.pgm"};
    }
    const double seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    write_manifest(run, seconds, started);
  } catch (const Failure& f) {
    std::fprintf(stderr, "error\t%s\t%s\n", run.command.empty() ? "cli" : run.command.c_str(), f.message.c_str());
    return f.code;
  }
  return 0;
}
