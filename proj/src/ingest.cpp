#include "walkup/ingest.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include "json.hpp"

#include "walkup/errors.hpp"
#include "walkup/io_util.hpp"

namespace walkup::ingest {

using nlohmann::json;

namespace {

constexpr double kDefaultFps = 30.0;
constexpr double kTimeTolerance = 1e-9;

enum class Slot { Body, LeftHand, RightHand };
constexpr std::array<Slot, 3> kSlots = {Slot::Body, Slot::LeftHand, Slot::RightHand};

std::size_t slot_size(Slot s) { return s == Slot::Body ? kBodyPointCount : kHandPointCount; }

const char* slot_key(Slot s) {
  switch (s) {
    case Slot::Body: return "body";
    case Slot::LeftHand: return "left_hand";
    case Slot::RightHand: return "right_hand";
  }
  return "";
}

const char* slot_csv_prefix(Slot s) {
  switch (s) {
    case Slot::Body: return "body";
    case Slot::LeftHand: return "lh";
    case Slot::RightHand: return "rh";
  }
  return "";
}

bool has_slot(const LandmarkFrame& f, Slot s) {
  switch (s) {
    case Slot::Body: return f.body.has_value();
    case Slot::LeftHand: return f.left_hand.has_value();
    case Slot::RightHand: return f.right_hand.has_value();
  }
  return false;
}

std::span<const Landmark> slot_points(const LandmarkFrame& f, Slot s) {
  switch (s) {
    case Slot::Body: return f.body->points;
    case Slot::LeftHand: return f.left_hand->points;
    case Slot::RightHand: return f.right_hand->points;
  }
  return {};
}

std::span<Landmark> slot_points(LandmarkFrame& f, Slot s) {
  switch (s) {
    case Slot::Body: return f.body->points;
    case Slot::LeftHand: return f.left_hand->points;
    case Slot::RightHand: return f.right_hand->points;
  }
  return {};
}

void emplace_slot(LandmarkFrame& f, Slot s) {
  switch (s) {
    case Slot::Body: f.body.emplace(); break;
    case Slot::LeftHand: f.left_hand.emplace(HandPose{Side::Left, {}}); break;
    case Slot::RightHand: f.right_hand.emplace(HandPose{Side::Right, {}}); break;
  }
}

Landmark lerp(const Landmark& a, const Landmark& b, double w) {
  return {a.x + (b.x - a.x) * w, a.y + (b.y - a.y) * w, a.z + (b.z - a.z) * w,
          a.visibility + (b.visibility - a.visibility) * w};
}

double estimate_fps(const std::vector<LandmarkFrame>& frames) {
  if (frames.size() < 2) return kDefaultFps;
  const double span = frames.back().timestamp - frames.front().timestamp;
  if (!(span > 0.0)) return kDefaultFps;
  return static_cast<double>(frames.size() - 1) / span;
}

// ---- JSONL ---------------------------------------------------------------

template <std::size_t N>
void read_points(const json& arr, std::array<Landmark, N>& points, std::size_t line, const char* key) {
  if (!arr.is_array() || arr.size() != N) {
    throw SchemaError(line, std::string("\"") + key + "\" must be an array of " + std::to_string(N) + " landmarks");
  }
  for (std::size_t i = 0; i < N; ++i) {
    const json& p = arr[i];
    if (!p.is_array() || p.size() != 4) {
      throw SchemaError(line, std::string(key) + "[" + std::to_string(i) + "] must be [x,y,z,v]");
    }
    for (const json& c : p) {
      if (!c.is_number()) throw SchemaError(line, std::string(key) + "[" + std::to_string(i) + "] has a non-numeric entry");
    }
    points[i] = {p[0].get<double>(), p[1].get<double>(), p[2].get<double>(), p[3].get<double>()};
  }
}

template <std::size_t N>
json write_points(const std::array<Landmark, N>& points) {
  json arr = json::array();
  for (const Landmark& p : points) arr.push_back(json::array({p.x, p.y, p.z, p.visibility}));
  return arr;
}

void apply_header(const json& header, LandmarkSequence& seq, bool& have_fps, std::size_t line) {
  if (header.contains("fps")) {
    if (!header["fps"].is_number() || !(header["fps"].get<double>() > 0.0)) {
      throw SchemaError(line, "\"fps\" must be a positive number");
    }
    seq.fps = header["fps"].get<double>();
    have_fps = true;
  }
  if (header.contains("item") && !header["item"].is_null()) {
    if (!header["item"].is_string()) throw SchemaError(line, "\"item\" must be a string");
    auto item = parse_item(header["item"].get<std::string>());
    if (!item) throw SchemaError(line, "unknown item \"" + header["item"].get<std::string>() + "\"");
    seq.item = item;
  }
  if (header.contains("subject") && !header["subject"].is_null()) {
    if (!header["subject"].is_string()) throw SchemaError(line, "\"subject\" must be a string");
    seq.subject_id = header["subject"].get<std::string>();
  }
}

LandmarkFrame read_json_frame(const json& obj, std::size_t line) {
  if (!obj.contains("t")) throw SchemaError(line, "frame is missing the \"t\" field");
  if (!obj["t"].is_number()) throw SchemaError(line, "\"t\" must be a number");
  LandmarkFrame frame;
  frame.timestamp = obj["t"].get<double>();
  if (auto it = obj.find("body"); it != obj.end() && !it->is_null()) {
    frame.body.emplace();
    read_points(*it, frame.body->points, line, "body");
  }
  if (auto it = obj.find("left_hand"); it != obj.end() && !it->is_null()) {
    frame.left_hand.emplace(HandPose{Side::Left, {}});
    read_points(*it, frame.left_hand->points, line, "left_hand");
  }
  if (auto it = obj.find("right_hand"); it != obj.end() && !it->is_null()) {
    frame.right_hand.emplace(HandPose{Side::Right, {}});
    read_points(*it, frame.right_hand->points, line, "right_hand");
  }
  return frame;
}

LandmarkSequence parse_jsonl(std::istream& in) {
  LandmarkSequence seq;
  bool have_fps = false;
  bool first_object = true;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (io::trim(line).empty()) continue;
    json obj;
    try {
      obj = json::parse(line);
    } catch (const json::parse_error& e) {
      throw SchemaError(line_no, std::string("malformed JSON: ") + e.what());
    }
    if (!obj.is_object()) throw SchemaError(line_no, "each line must be a JSON object");
    if (first_object && !obj.contains("t")) {
      apply_header(obj, seq, have_fps, line_no);
      first_object = false;
      continue;
    }
    first_object = false;
    seq.frames.push_back(read_json_frame(obj, line_no));
  }
  if (in.bad()) throw UnreadableInput("stream read failed");
  if (seq.frames.empty()) throw EmptySequence();
  if (!have_fps) seq.fps = estimate_fps(seq.frames);
  return seq;
}

// ---- CSV -----------------------------------------------------------------

struct CsvColumn {
  Slot slot;
  std::size_t point;
  int field;  // 0..3 = x,y,z,v
};

std::string csv_column_name(Slot s, std::size_t i, int field) {
  static constexpr const char* kFields[] = {"x", "y", "z", "v"};
  return std::string(slot_csv_prefix(s)) + "_" + std::to_string(i) + "_" + kFields[field];
}

LandmarkSequence parse_csv(std::istream& in) {
  std::map<std::string, CsvColumn, std::less<>> known;
  for (Slot s : kSlots) {
    for (std::size_t i = 0; i < slot_size(s); ++i) {
      for (int f = 0; f < 4; ++f) known.emplace(csv_column_name(s, i, f), CsvColumn{s, i, f});
    }
  }

  LandmarkSequence seq;
  json header;
  bool have_fps = false;
  std::string line;
  std::size_t line_no = 0;
  std::size_t t_col = std::string::npos;
  std::vector<std::optional<CsvColumn>> columns;
  // Per slot: how many of its 4*N cells appear in the header.
  std::array<std::size_t, 3> slot_columns{};

  while (std::getline(in, line)) {
    ++line_no;
    std::string_view text = io::trim(line);
    if (text.empty()) continue;
    if (text.front() == '#') {
      text.remove_prefix(1);
      const auto eq = text.find('=');
      if (eq == std::string_view::npos) continue;
      const std::string key(io::trim(text.substr(0, eq)));
      const std::string value(io::trim(text.substr(eq + 1)));
      if (key == "fps") {
        double fps = 0.0;
        if (!io::parse_number(value, fps)) throw SchemaError(line_no, "fps comment is not a number");
        header["fps"] = fps;
      } else if (key == "item" || key == "subject") {
        header[key] = value;
      }
      continue;
    }

    const auto cells = io::split(text, ',');
    if (columns.empty() && t_col == std::string::npos) {
      apply_header(header, seq, have_fps, line_no);
      columns.resize(cells.size());
      for (std::size_t c = 0; c < cells.size(); ++c) {
        const std::string_view name = io::trim(cells[c]);
        if (name == "t") {
          t_col = c;
        } else if (auto it = known.find(name); it != known.end()) {
          columns[c] = it->second;
          ++slot_columns[static_cast<std::size_t>(it->second.slot)];
        } else {
          throw SchemaError(line_no, "unknown column \"" + std::string(name) + "\"");
        }
      }
      if (t_col == std::string::npos) throw SchemaError(line_no, "header has no \"t\" column");
      for (Slot s : kSlots) {
        const std::size_t n = slot_columns[static_cast<std::size_t>(s)];
        if (n != 0 && n != 4 * slot_size(s)) {
          throw SchemaError(line_no, std::string("incomplete column set for ") + slot_csv_prefix(s));
        }
      }
      continue;
    }

    if (cells.size() != columns.size()) {
      throw SchemaError(line_no, "expected " + std::to_string(columns.size()) + " cells, got " +
                                     std::to_string(cells.size()));
    }
    LandmarkFrame frame;
    if (!io::parse_number(cells[t_col], frame.timestamp)) throw SchemaError(line_no, "\"t\" is missing or not a number");

    std::array<std::size_t, 3> filled{};
    std::array<std::size_t, 3> empty{};
    for (std::size_t c = 0; c < cells.size(); ++c) {
      if (!columns[c]) continue;
      const auto k = static_cast<std::size_t>(columns[c]->slot);
      if (io::trim(cells[c]).empty()) {
        ++empty[k];
      } else {
        ++filled[k];
      }
    }
    for (Slot s : kSlots) {
      const auto k = static_cast<std::size_t>(s);
      if (filled[k] != 0 && empty[k] != 0) {
        throw SchemaError(line_no, std::string("pose ") + slot_key(s) + " is partially empty");
      }
      if (filled[k] != 0) emplace_slot(frame, s);
    }
    for (std::size_t c = 0; c < cells.size(); ++c) {
      if (!columns[c] || !has_slot(frame, columns[c]->slot)) continue;
      double v = 0.0;
      if (!io::parse_number(cells[c], v)) {
        throw SchemaError(line_no, "cell for column " + std::to_string(c + 1) + " is not a number");
      }
      Landmark& p = slot_points(frame, columns[c]->slot)[columns[c]->point];
      switch (columns[c]->field) {
        case 0: p.x = v; break;
        case 1: p.y = v; break;
        case 2: p.z = v; break;
        default: p.visibility = v; break;
      }
    }
    seq.frames.push_back(std::move(frame));
  }
  if (in.bad()) throw UnreadableInput("stream read failed");
  if (seq.frames.empty()) throw EmptySequence();
  if (!have_fps) seq.fps = estimate_fps(seq.frames);
  return seq;
}

}  // namespace

void IngestConfig::validate() const {
  if (resample_fps && !(*resample_fps > 0.0 && std::isfinite(*resample_fps))) {
    throw InvalidConfig("resample_fps must be positive");
  }
  if (!(min_visibility >= 0.0 && min_visibility <= 1.0)) throw InvalidConfig("min_visibility must lie in [0,1]");
}

std::optional<Format> parse_format(std::string_view name) {
  if (name == "jsonl") return Format::JsonLines;
  if (name == "csv") return Format::Csv;
  return std::nullopt;
}

std::string_view to_string(Format f) { return f == Format::JsonLines ? "jsonl" : "csv"; }

std::optional<GapFill> parse_gap_fill(std::string_view name) {
  if (name == "hold_last") return GapFill::HoldLast;
  if (name == "linear_interp") return GapFill::LinearInterp;
  if (name == "drop") return GapFill::Drop;
  return std::nullopt;
}

std::string_view to_string(GapFill g) {
  switch (g) {
    case GapFill::HoldLast: return "hold_last";
    case GapFill::LinearInterp: return "linear_interp";
    case GapFill::Drop: return "drop";
  }
  return "";
}

LandmarkSequence parse_frames(std::istream& in, Format format) {
  return format == Format::JsonLines ? parse_jsonl(in) : parse_csv(in);
}

LandmarkSequence parse_frames(const std::filesystem::path& path, Format format) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw UnreadableInput("cannot open " + path.string());
  return parse_frames(in, format);
}

Format guess_format(const std::filesystem::path& path) {
  return path.extension() == ".csv" ? Format::Csv : Format::JsonLines;
}

void write_jsonl(std::ostream& out, const LandmarkSequence& seq) {
  json header = {{"fps", seq.fps}};
  if (seq.item) header["item"] = std::string(to_string(*seq.item));
  if (!seq.subject_id.empty()) header["subject"] = seq.subject_id;
  out << header.dump() << '\n';
  for (const LandmarkFrame& f : seq.frames) {
    json obj = {{"t", f.timestamp}};
    if (f.body) obj["body"] = write_points(f.body->points);
    if (f.left_hand) obj["left_hand"] = write_points(f.left_hand->points);
    if (f.right_hand) obj["right_hand"] = write_points(f.right_hand->points);
    out << obj.dump() << '\n';
  }
}

std::string to_jsonl(const LandmarkSequence& seq) {
  std::ostringstream ss;
  write_jsonl(ss, seq);
  return ss.str();
}

void write_csv(std::ostream& out, const LandmarkSequence& seq) {
  out << "# fps=" << io::format_number(seq.fps) << '\n';
  if (seq.item) out << "# item=" << to_string(*seq.item) << '\n';
  if (!seq.subject_id.empty()) out << "# subject=" << seq.subject_id << '\n';
  out << 't';
  for (Slot s : kSlots) {
    for (std::size_t i = 0; i < slot_size(s); ++i) {
      for (int f = 0; f < 4; ++f) out << ',' << csv_column_name(s, i, f);
    }
  }
  out << '\n';
  for (const LandmarkFrame& frame : seq.frames) {
    out << io::format_number(frame.timestamp);
    for (Slot s : kSlots) {
      const bool present = has_slot(frame, s);
      for (std::size_t i = 0; i < slot_size(s); ++i) {
        if (!present) {
          out << ",,,,";
          continue;
        }
        const Landmark& p = slot_points(frame, s)[i];
        out << ',' << io::format_number(p.x) << ',' << io::format_number(p.y) << ','
            << io::format_number(p.z) << ',' << io::format_number(p.visibility);
      }
    }
    out << '\n';
  }
}

LandmarkSequence fill_gaps(const LandmarkSequence& seq, const IngestConfig& cfg) {
  cfg.validate();
  LandmarkSequence out = seq;
  if (cfg.gap_fill == GapFill::Drop) return out;
  const auto& src = seq.frames;
  const std::size_t n = src.size();

  for (Slot s : kSlots) {
    std::vector<std::size_t> carriers;
    for (std::size_t f = 0; f < n; ++f) {
      if (has_slot(src[f], s)) carriers.push_back(f);
    }
    if (carriers.empty()) continue;

    // Restore interior absences.
    std::vector<bool> restored(n, false);
    for (std::size_t f = carriers.front(); f <= carriers.back(); ++f) {
      if (!has_slot(out.frames[f], s)) {
        emplace_slot(out.frames[f], s);
        for (Landmark& p : slot_points(out.frames[f], s)) p = Landmark{0.0, 0.0, 0.0, 0.0};
        restored[f] = true;
      }
    }

    for (std::size_t i = 0; i < slot_size(s); ++i) {
      std::vector<std::size_t> obs;
      for (std::size_t f : carriers) {
        if (slot_points(src[f], s)[i].visibility >= cfg.min_visibility) obs.push_back(f);
      }
      if (obs.empty()) continue;
      std::size_t next = 0;  // index into obs of the first observation at or after f
      for (std::size_t f = 0; f < n; ++f) {
        while (next < obs.size() && obs[next] < f) ++next;
        if (!has_slot(out.frames[f], s)) continue;
        if (!restored[f] && slot_points(src[f], s)[i].visibility >= cfg.min_visibility) continue;

        const bool has_prev = next > 0;
        const bool has_next = next < obs.size();
        Landmark filled;
        if (cfg.gap_fill == GapFill::HoldLast) {
          if (!has_prev) continue;
          filled = slot_points(src[obs[next - 1]], s)[i];
        } else if (has_prev && has_next) {
          const std::size_t a = obs[next - 1];
          const std::size_t b = obs[next];
          const double w = (src[f].timestamp - src[a].timestamp) / (src[b].timestamp - src[a].timestamp);
          filled = lerp(slot_points(src[a], s)[i], slot_points(src[b], s)[i], w);
        } else {
          filled = slot_points(src[has_prev ? obs[next - 1] : obs[next]], s)[i];
        }
        filled.visibility = cfg.min_visibility;
        slot_points(out.frames[f], s)[i] = filled;
      }
    }
  }
  return out;
}

LandmarkSequence resample(const LandmarkSequence& seq, const IngestConfig& cfg) {
  cfg.validate();
  if (!cfg.resample_fps) throw InvalidConfig("resample requires resample_fps");
  if (seq.frames.empty()) throw EmptySequence();
  const double fps = *cfg.resample_fps;
  const auto& src = seq.frames;
  const double t0 = src.front().timestamp;
  const double span = src.back().timestamp - t0;
  const auto count = static_cast<std::size_t>(std::floor(span * fps + kTimeTolerance)) + 1;

  LandmarkSequence out;
  out.fps = fps;
  out.item = seq.item;
  out.subject_id = seq.subject_id;
  out.frames.reserve(count);

  std::size_t j = 0;
  for (std::size_t k = 0; k < count; ++k) {
    const double rel = static_cast<double>(k) / fps;
    const double t = t0 + rel;
    while (j + 1 < src.size() && src[j + 1].timestamp <= t + kTimeTolerance) ++j;

    LandmarkFrame frame;
    if (std::abs(src[j].timestamp - t) <= kTimeTolerance || j + 1 == src.size()) {
      frame = src[j];
    } else {
      const LandmarkFrame& a = src[j];
      const LandmarkFrame& b = src[j + 1];
      const double w = (t - a.timestamp) / (b.timestamp - a.timestamp);
      for (Slot s : kSlots) {
        const bool in_a = has_slot(a, s);
        const bool in_b = has_slot(b, s);
        if (in_a && in_b) {
          emplace_slot(frame, s);
          auto pa = slot_points(a, s);
          auto pb = slot_points(b, s);
          auto dst = slot_points(frame, s);
          for (std::size_t i = 0; i < dst.size(); ++i) dst[i] = lerp(pa[i], pb[i], w);
        } else if (in_a && cfg.gap_fill != GapFill::Drop) {
          emplace_slot(frame, s);
          std::ranges::copy(slot_points(a, s), slot_points(frame, s).begin());
        } else if (in_b && cfg.gap_fill == GapFill::LinearInterp) {
          emplace_slot(frame, s);
          std::ranges::copy(slot_points(b, s), slot_points(frame, s).begin());
        }
      }
    }
    frame.timestamp = rel;
    if (!frame.body && !frame.left_hand && !frame.right_hand) continue;
    out.frames.push_back(std::move(frame));
  }
  if (out.frames.empty()) throw EmptySequence();
  return out;
}

LandmarkSequence prepare(const LandmarkSequence& seq, const IngestConfig& cfg) {
  LandmarkSequence filled = fill_gaps(seq, cfg);
  if (cfg.resample_fps) return resample(filled, cfg);
  return filled;
}

}  // namespace walkup::ingest
