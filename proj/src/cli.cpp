#include "walkup/cli.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <thread>

#include "CLI11.hpp"
#include "json.hpp"
#include "walkup/errors.hpp"
#include "walkup/features.hpp"
#include "walkup/ingest.hpp"
#include "walkup/io_util.hpp"
#include "walkup/report.hpp"
#include "walkup/signals.hpp"
#include "walkup/synth.hpp"

namespace walkup::cli {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

class UsageError : public Error {
 public:
  explicit UsageError(const std::string& what) : Error("UsageError: " + what) {}
};

struct Options {
  std::vector<std::string> inputs;
  std::string out;
  std::string item;
  std::string format;
  std::string config;
  std::string spec;
  std::string plane;
  bool normalize_palm = false;
  bool dump_config = false;
  double min_prominence = 0.0;
  double min_separation = 0.0;
  unsigned threads = 1;
  unsigned jobs = 0;

  std::uint64_t seed = 0;
  double duration = 10.0;
  double fps = 30.0;
  double amplitude = 0.0;
  double frequency = 1.0;
  double decrement = 0.0;
  double growth = 0.0;
  double tremor_amplitude = 0.0;
  double tremor_freq = 5.0;
  double noise = 0.0;
  std::string sides = "right";
  std::string subject;

  std::set<std::string> given;  // long names of options present on the command line
};

UpdrsItem item_or_throw(const std::string& name) {
  const auto item = parse_item(name);
  if (!item) throw UsageError("unknown item \"" + name + "\"");
  return *item;
}

std::vector<features::FeatureSpec> load_specs(const std::string& spec) {
  if (spec == "default") return features::default_specs();
  try {
    return features::specs_from_json(json::parse(io::read_file(spec)));
  } catch (const json::exception& e) {
    throw InvalidConfig("spec file " + spec + ": " + e.what());
  } catch (const std::invalid_argument& e) {
    throw InvalidConfig("spec file " + spec + ": " + e.what());
  }
}

report::AnalysisConfig build_config(const Options& o) {
  report::AnalysisConfig cfg;
  if (!o.config.empty()) {
    json j;
    try {
      j = json::parse(io::read_file(o.config));
    } catch (const json::exception& e) {
      throw InvalidConfig("config file " + o.config + ": " + e.what());
    }
    cfg = report::AnalysisConfig::from_json(j);
  }
  if (o.given.contains("plane")) {
    if (o.plane != "2d" && o.plane != "3d") throw UsageError("--plane must be 2d or 3d");
    cfg.signal.plane = o.plane == "3d" ? kinematics::Plane::Full3D : kinematics::Plane::Image2D;
  }
  if (o.normalize_palm) cfg.signal.normalize_palm = true;
  if (o.given.contains("spec")) cfg.features = load_specs(o.spec);
  if (o.given.contains("min-prominence")) cfg.peaks.min_prominence = o.min_prominence;
  if (o.given.contains("min-separation")) cfg.peaks.min_separation_s = o.min_separation;
  cfg.validate();
  return cfg;
}

ingest::Format input_format(const Options& o, const fs::path& path) {
  if (o.format.empty()) return ingest::guess_format(path);
  const auto f = ingest::parse_format(o.format);
  if (!f) throw UsageError("--format must be jsonl or csv");
  return *f;
}

LandmarkSequence parse_sequence(const Options& o, const fs::path& path, const std::string& bytes) {
  std::istringstream in(bytes);
  LandmarkSequence seq = ingest::parse_frames(in, input_format(o, path));
  if (!o.item.empty()) seq.item = item_or_throw(o.item);
  if (seq.subject_id.empty()) seq.subject_id = path.stem().string();
  return seq;
}

void print_violations(std::ostream& os, const std::string& path, const ValidationReport& rep) {
  for (const Violation& v : rep) {
    os << path << ": ";
    if (v.frame) os << "frame " << *v.frame << ": ";
    os << v.code << ": " << v.message << '\n';
  }
}

/// Maps a library exception to an exit code, printing it to `err`.
int report_error(std::ostream& err, const std::string& context) {
  const std::string prefix = context.empty() ? "" : context + ": ";
  try {
    throw;
  } catch (const UnreadableInput& e) {
    err << prefix << e.what() << '\n';
    return kIoError;
  } catch (const UsageError& e) {
    err << prefix << e.what() << '\n';
    return kUsageError;
  } catch (const InvalidConfig& e) {
    err << prefix << e.what() << '\n';
    return kUsageError;
  } catch (const Error& e) {
    err << prefix << e.what() << '\n';
    return kValidationFailure;
  } catch (const std::exception& e) {
    err << prefix << "error: " << e.what() << '\n';
    return kValidationFailure;
  }
}

int cmd_validate(const Options& o, std::ostream& out, std::ostream& err) {
  int code = kOk;
  for (const std::string& path : o.inputs) {
    try {
      const LandmarkSequence seq = parse_sequence(o, path, io::read_file(path));
      const ValidationReport rep = validate_sequence(seq);
      if (rep.empty()) {
        out << path << ": ok (" << seq.frames.size() << " frames)\n";
      } else {
        print_violations(out, path, rep);
        code = std::max(code, kValidationFailure);
      }
    } catch (...) {
      code = std::max(code, report_error(err, path));
    }
  }
  return code;
}

int cmd_signals(const Options& o, std::ostream& out, std::ostream&) {
  const report::AnalysisConfig cfg = build_config(o);
  const fs::path dir = o.out;
  for (const std::string& path : o.inputs) {
    const LandmarkSequence seq = parse_sequence(o, path, io::read_file(path));
    if (const ValidationReport rep = validate_sequence(seq); !rep.empty()) {
      print_violations(out, path, rep);
      return kValidationFailure;
    }
    if (!seq.item) throw UsageError(path + ": the item is unknown; pass --item");
    const LandmarkSequence prepared = ingest::prepare(seq, cfg.ingest);
    for (const SignalSeries& s : signals::build_all(prepared, cfg.signal, cfg.tremor)) {
      std::ostringstream csv;
      signals::write_series_csv(csv, s);
      const fs::path target = dir / signals::series_file_name(seq.subject_id, s);
      io::write_file_atomic(target, csv.str());
      out << target.string() << '\n';
    }
  }
  return kOk;
}

void analyze_one(const Options& o, const report::AnalysisConfig& cfg, const std::string& path, const fs::path& dir) {
  const std::string bytes = io::read_file(path);
  LandmarkSequence seq = parse_sequence(o, path, bytes);
  if (const ValidationReport rep = validate_sequence(seq); !rep.empty()) {
    std::ostringstream os;
    print_violations(os, path, rep);
    throw Error("ValidationFailed:\n" + os.str());
  }
  if (!seq.item) throw UsageError("the item is unknown; pass --item");
  const report::AnalysisReport r = report::analyze(seq, cfg, io::sha256_hex(bytes), o.threads);

  io::write_file_atomic(dir / "report.json", report::render_json(report::to_json(r)));
  for (const report::ChannelReport& ch : r.channels) {
    const std::string base =
        seq.subject_id + "_" + std::string(to_string(r.item)) + "_" + std::string(to_string(ch.series.channel));
    if (ch.extrema) {
      std::ostringstream peaks_csv;
      peaks::write_overlay_csv(peaks_csv, ch.series, *ch.extrema);
      io::write_file_atomic(dir / (base + "_peaks.csv"), peaks_csv.str());
    }
    std::ostringstream plot_csv;
    report::write_plot_csv(plot_csv, ch.series);
    io::write_file_atomic(dir / (base + "_plot.csv"), plot_csv.str());
    io::write_file_atomic(dir / (base + ".svg"), report::render_svg(ch.series, ch.extrema));
  }
}

int cmd_analyze(const Options& o, std::ostream& out, std::ostream& err) {
  const report::AnalysisConfig cfg = build_config(o);
  if (o.dump_config) {
    out << report::render_json(cfg.to_json());
    return kOk;
  }
  if (o.inputs.empty()) throw UsageError("--in is required");
  if (o.out.empty()) throw UsageError("--out is required");

  std::vector<fs::path> dirs;
  if (o.inputs.size() == 1) {
    dirs.emplace_back(o.out);
  } else {
    std::set<std::string> stems;
    for (const std::string& path : o.inputs) {
      const std::string stem = fs::path(path).stem().string();
      if (!stems.insert(stem).second) throw UsageError("two inputs share the file stem \"" + stem + "\"");
      dirs.push_back(fs::path(o.out) / stem);
    }
  }

  const std::size_t n = o.inputs.size();
  std::vector<int> codes(n, kOk);
  std::vector<std::string> messages(n);
  auto work = [&](std::size_t i) {
    std::ostringstream diag;
    try {
      analyze_one(o, cfg, o.inputs[i], dirs[i]);
    } catch (...) {
      codes[i] = report_error(diag, o.inputs[i]);
    }
    messages[i] = diag.str();
  };
  const unsigned hw = std::max(1u, std::thread::hardware_concurrency());
  const std::size_t jobs = std::clamp<std::size_t>(o.jobs ? o.jobs : hw, 1, n);
  {
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < jobs; ++w) {
      pool.emplace_back([&, w] {
        for (std::size_t i = w; i < n; i += jobs) work(i);
      });
    }
  }
  int code = kOk;
  for (std::size_t i = 0; i < n; ++i) {
    err << messages[i];
    if (codes[i] == kOk) out << (dirs[i] / "report.json").string() << '\n';
    code = std::max(code, codes[i]);
  }
  return code;
}

int cmd_features(const Options& o, std::ostream& out, std::ostream&) {
  if (o.inputs.size() != 1) throw UsageError("features takes exactly one --in signal CSV");
  const auto specs = o.given.contains("spec") ? load_specs(o.spec) : features::default_specs();
  std::istringstream in(io::read_file(o.inputs.front()));
  const SignalSeries series = signals::read_series_csv(in);
  const features::FeatureVector fv = features::extract(series, specs, o.threads);

  std::ostringstream text;
  const bool as_json = !o.out.empty() && fs::path(o.out).extension() == ".json";
  if (as_json) {
    text << report::render_json(features::to_json(fv));
  } else {
    features::write_csv(text, fv);
  }
  if (o.out.empty()) {
    out << text.str();
  } else {
    io::write_file_atomic(o.out, text.str());
  }
  return kOk;
}

int cmd_synth(const Options& o, std::ostream& out, std::ostream&) {
  if (o.item.empty()) throw UsageError("--item is required");
  synth::MotionScenario s = synth::MotionScenario::for_item(item_or_throw(o.item));
  s.duration_s = o.duration;
  s.fps = o.fps;
  s.frequency_hz = o.frequency;
  s.amplitude_decrement_per_cycle = o.decrement;
  s.interval_growth_s_per_cycle = o.growth;
  s.tremor_freq_hz = o.tremor_freq;
  s.noise_std = o.noise;
  s.seed = o.seed;
  if (o.given.contains("amplitude")) s.base_amplitude = o.amplitude;
  if (o.given.contains("tremor-amplitude")) s.tremor_amplitude = o.tremor_amplitude;
  if (!o.subject.empty()) s.subject_id = o.subject;
  if (o.sides == "right") {
    s.sides = {Side::Right};
  } else if (o.sides == "left") {
    s.sides = {Side::Left};
  } else if (o.sides == "both") {
    s.sides = {Side::Left, Side::Right};
  } else {
    throw UsageError("--sides must be left, right or both");
  }

  const LandmarkSequence seq = synth::generate(s);
  std::ostringstream text;
  const ingest::Format fmt = o.format.empty() ? ingest::Format::JsonLines : input_format(o, o.out);
  if (fmt == ingest::Format::Csv) {
    ingest::write_csv(text, seq);
  } else {
    ingest::write_jsonl(text, seq);
  }
  if (o.out.empty()) {
    out << text.str();
  } else {
    io::write_file_atomic(o.out, text.str());
  }
  return kOk;
}

std::vector<fs::path> report_files(const std::vector<std::string>& inputs) {
  std::vector<fs::path> files;
  for (const std::string& in : inputs) {
    if (fs::is_directory(in)) {
      std::vector<fs::path> found;
      for (const auto& entry : fs::recursive_directory_iterator(in)) {
        if (entry.is_regular_file() && entry.path().filename() == "report.json") found.push_back(entry.path());
      }
      std::ranges::sort(found);
      files.insert(files.end(), found.begin(), found.end());
    } else {
      files.emplace_back(in);
    }
  }
  return files;
}

int cmd_report(const Options& o, std::ostream& out, std::ostream&) {
  std::vector<json> reports;
  for (const fs::path& file : report_files(o.inputs)) {
    json j;
    try {
      j = json::parse(io::read_file(file));
    } catch (const json::exception& e) {
      throw SchemaError(1, file.string() + ": " + e.what());
    }
    if (!j.is_object() || j.value("schema", "") != report::kSchema) {
      throw SchemaError(1, file.string() + " is not a " + std::string(report::kSchema) + " report");
    }
    reports.push_back(std::move(j));
  }
  if (reports.empty()) throw UsageError("no reports found");
  std::ostringstream text;
  report::write_summary_csv(text, reports);
  if (o.out.empty()) {
    out << text.str();
  } else {
    io::write_file_atomic(o.out, text.str());
  }
  return kOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Motion-signal extraction and analysis for landmark recordings", "walkup"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(report::kToolVersion));
  Options o;

  auto add_input = [&](CLI::App* sub, bool required) {
    auto* opt = sub->add_option("--in", o.inputs, "input file(s)");
    if (required) opt->required();
  };
  auto add_landmark_flags = [&](CLI::App* sub) {
    sub->add_option("--item", o.item, "finger_taps|hand_movement|alternating_hands|tremor_at_rest|leg_agility|foot_taps");
    sub->add_option("--format", o.format, "input format: jsonl|csv (default: by extension)");
  };
  auto add_config_flags = [&](CLI::App* sub) {
    sub->add_option("--config", o.config, "versioned JSON config file");
    sub->add_option("--plane", o.plane, "2d|3d");
    sub->add_flag("--normalize-palm", o.normalize_palm, "divide hand openness by palm length");
  };

  auto* validate = app.add_subcommand("validate", "check landmark files against the data model");
  add_input(validate, true);
  add_landmark_flags(validate);

  auto* sig = app.add_subcommand("signals", "write per-channel signal CSVs");
  add_input(sig, true);
  sig->add_option("--out", o.out, "output directory")->required();
  add_landmark_flags(sig);
  add_config_flags(sig);

  auto* analyze = app.add_subcommand("analyze", "signals, peaks, cadence and features into a report");
  add_input(analyze, false);
  analyze->add_option("--out", o.out, "output directory");
  add_landmark_flags(analyze);
  add_config_flags(analyze);
  analyze->add_option("--spec", o.spec, "feature spec: default or a JSON file");
  analyze->add_option("--min-prominence", o.min_prominence, "peak prominence as a fraction of the signal range");
  analyze->add_option("--min-separation", o.min_separation, "minimum seconds between peaks");
  analyze->add_option("--threads", o.threads, "feature extraction threads")->check(CLI::PositiveNumber);
  analyze->add_option("--jobs", o.jobs, "files analyzed in parallel (default: hardware threads)");
  analyze->add_flag("--dump-config", o.dump_config, "print the effective config and exit");

  auto* feat = app.add_subcommand("features", "feature vector of a t,value signal CSV");
  add_input(feat, true);
  feat->add_option("--out", o.out, "output file (.json for JSON, otherwise CSV; default stdout)");
  feat->add_option("--spec", o.spec, "feature spec: default or a JSON file");
  feat->add_option("--threads", o.threads, "feature extraction threads")->check(CLI::PositiveNumber);

  auto* syn = app.add_subcommand("synth", "generate a synthetic landmark recording");
  syn->add_option("--item", o.item, "item to simulate")->required();
  syn->add_option("--out", o.out, "output file (default stdout)");
  syn->add_option("--format", o.format, "jsonl|csv (default jsonl)");
  syn->add_option("--seed", o.seed, "noise seed");
  syn->add_option("--duration", o.duration, "seconds");
  syn->add_option("--fps", o.fps, "frames per second");
  syn->add_option("--amplitude", o.amplitude, "cycle amplitude (degrees, or image units for hand_movement)");
  syn->add_option("--frequency", o.frequency, "cycles per second");
  syn->add_option("--decrement", o.decrement, "amplitude lost per cycle");
  syn->add_option("--interval-growth", o.growth, "seconds added to each successive cycle");
  syn->add_option("--tremor-amplitude", o.tremor_amplitude, "wrist tremor amplitude, image units");
  syn->add_option("--tremor-freq", o.tremor_freq, "tremor frequency in Hz");
  syn->add_option("--noise", o.noise, "gaussian landmark noise std");
  syn->add_option("--sides", o.sides, "left|right|both");
  syn->add_option("--subject", o.subject, "subject id written to the header");

  auto* rep = app.add_subcommand("report", "merge analysis reports into one summary CSV");
  add_input(rep, true);
  rep->add_option("--out", o.out, "output CSV (default stdout)");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kUsageError;
  }

  for (CLI::App* sub : app.get_subcommands()) {
    for (const CLI::Option* opt : sub->get_options()) {
      if (opt->count() > 0) o.given.insert(opt->get_single_name());
    }
  }

  try {
    if (validate->parsed()) return cmd_validate(o, out, err);
    if (sig->parsed()) return cmd_signals(o, out, err);
    if (analyze->parsed()) return cmd_analyze(o, out, err);
    if (feat->parsed()) return cmd_features(o, out, err);
    if (syn->parsed()) return cmd_synth(o, out, err);
    if (rep->parsed()) return cmd_report(o, out, err);
  } catch (...) {
    return report_error(err, "");
  }
  return kUsageError;
}

}  // namespace walkup::cli
