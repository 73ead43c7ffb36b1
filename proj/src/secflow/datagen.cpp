#include "secflow/datagen.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <istream>
#include <limits>
#include <numeric>
#include <ostream>
#include <sstream>

#include "secflow/errors.hpp"

namespace secflow {
namespace {

struct FeatureSpec {
  double mean;
  double sd;
  double lo;  // truncation bounds
  double hi;
};

constexpr double kInf = std::numeric_limits<double>::infinity();

// Normal-traffic profile per feature. protocol_type is categorical and
// handled separately (its entry is a placeholder).
const std::vector<FeatureSpec>& normal_profile(DatasetKind kind) {
  static const std::vector<FeatureSpec> ntd = {
      {2.0, 1.0, 0.0, kInf},       // duration
      {0.0, 0.0, 0.0, 2.0},        // protocol_type
      {500.0, 100.0, 0.0, kInf},   // src_bytes
      {1500.0, 300.0, 0.0, kInf},  // dst_bytes
      {20.0, 5.0, 0.0, kInf},      // packet_count
      {10.0, 3.0, 0.0, kInf},      // srv_count
      {0.05, 0.03, 0.0, 1.0},      // serror_rate
      {0.5, 0.08, 0.0, 1.0},       // same_srv_rate
  };
  static const std::vector<FeatureSpec> clf = {
      {0.30, 0.03, 0.0, 1.0},  // cpu_util
      {0.40, 0.03, 0.0, 1.0},  // ram_util
      {0.25, 0.03, 0.0, 1.0},  // bw_util
  };
  return kind == DatasetKind::NTD ? ntd : clf;
}

// Full-scale mean shift of each attack type, applied as shift * (0.25 + 0.75 * intensity).
const std::vector<double>& signature(DatasetKind kind, Label label) {
  static const std::array<std::vector<double>, kLabelCount> ntd = {{
      {0, 0, 0, 0, 0, 0, 0, 0},
      {0.0, 0, 300.0, 0.0, 200.0, 25.0, 0.60, 0.35},   // DoS: packet floods, SYN errors
      {3.0, 0, 0.0, 0.0, 40.0, 60.0, 0.25, 0.30},      // Probe: service sweeps
      {12.0, 0, 900.0, 600.0, 0.0, 8.0, 0.10, 0.0},    // U2R: long privileged sessions
      {5.0, 0, 400.0, 3600.0, 30.0, 0.0, 0.0, 0.20},   // R2L: large remote transfers
  }};
  static const std::array<std::vector<double>, kLabelCount> clf = {{
      {0, 0, 0},
      {0.20, 0.05, 0.45},  // DoS: bandwidth saturation
      {0.10, 0.35, 0.30},  // Probe
      {0.45, 0.25, 0.05},  // U2R: CPU-bound escalation
      {0.20, 0.40, 0.15},  // R2L
  }};
  return kind == DatasetKind::NTD ? ntd[index_of(label)] : clf[index_of(label)];
}

const std::array<double, 3>& protocol_mix(Label label) {
  static const std::array<std::array<double, 3>, kLabelCount> mix = {{
      {0.6, 0.3, 0.1},
      {0.3, 0.2, 0.5},
      {0.4, 0.2, 0.4},
      {0.9, 0.1, 0.0},
      {0.9, 0.1, 0.0},
  }};
  return mix[index_of(label)];
}

constexpr std::size_t kProtocolFeature = 1;

std::string lower(std::string_view s) {
  std::string out(s);
  for (auto& ch : out) ch = static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
  return out;
}

std::string format_double(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

}  // namespace

std::string_view to_string(DatasetKind kind) { return kind == DatasetKind::NTD ? "ntd" : "clf"; }

DatasetKind parse_dataset_kind(std::string_view name) {
  const std::string key = lower(name);
  if (key == "ntd") return DatasetKind::NTD;
  if (key == "clf") return DatasetKind::CLF;
  fail(ErrorCode::Config, "unknown dataset kind '" + std::string(name) + "'");
}

std::string_view to_string(Label label) {
  switch (label) {
    case Label::Normal: return "normal";
    case Label::DoS: return "dos";
    case Label::Probe: return "probe";
    case Label::U2R: return "u2r";
    case Label::R2L: return "r2l";
  }
  return "?";
}

Label parse_label(std::string_view name) {
  const std::string key = lower(name);
  for (Label l : kAllLabels) {
    if (to_string(l) == key) return l;
  }
  fail(ErrorCode::Parse, "unknown label '" + std::string(name) + "'");
}

Label label_of(AttackType type) {
  switch (type) {
    case AttackType::DoS: return Label::DoS;
    case AttackType::Probe: return Label::Probe;
    case AttackType::U2R: return Label::U2R;
    case AttackType::R2L: return Label::R2L;
  }
  return Label::Normal;
}

std::optional<AttackType> attack_of(Label label) {
  switch (label) {
    case Label::Normal: return std::nullopt;
    case Label::DoS: return AttackType::DoS;
    case Label::Probe: return AttackType::Probe;
    case Label::U2R: return AttackType::U2R;
    case Label::R2L: return AttackType::R2L;
  }
  return std::nullopt;
}

const std::vector<std::string>& feature_names(DatasetKind kind) {
  static const std::vector<std::string> ntd = {"duration",     "protocol_type", "src_bytes",   "dst_bytes",
                                               "packet_count", "srv_count",     "serror_rate", "same_srv_rate"};
  static const std::vector<std::string> clf = {"cpu_util", "ram_util", "bw_util"};
  return kind == DatasetKind::NTD ? ntd : clf;
}

AttackMix default_attack_mix() {
  return {{Label::Normal, 0.6}, {Label::DoS, 0.15}, {Label::Probe, 0.1}, {Label::U2R, 0.05}, {Label::R2L, 0.1}};
}

TelemetryRecord synthesize_record(DatasetKind kind, Label label, double intensity, Rng& rng,
                                  const GeneratorOptions& opts) {
  const auto& profile = normal_profile(kind);
  const auto& shift = signature(kind, label);
  const double scale = label == Label::Normal ? 0.0 : opts.separation * (0.25 + 0.75 * intensity);

  TelemetryRecord rec;
  rec.label = label;
  rec.intensity = label == Label::Normal ? 0.0 : intensity;
  rec.features.resize(profile.size());
  std::normal_distribution<double> unit(0.0, 1.0);
  for (std::size_t f = 0; f < profile.size(); ++f) {
    if (kind == DatasetKind::NTD && f == kProtocolFeature) {
      const auto& mix = protocol_mix(label);
      std::discrete_distribution<int> pick(mix.begin(), mix.end());
      rec.features[f] = static_cast<double>(pick(rng));
      continue;
    }
    const FeatureSpec& spec = profile[f];
    const double x = spec.mean + shift[f] * scale + spec.sd * unit(rng);
    rec.features[f] = std::clamp(x, spec.lo, spec.hi);
  }
  return rec;
}

Dataset generate(DatasetKind kind, std::size_t n, const AttackMix& mix, std::uint64_t seed,
                 const GeneratorOptions& opts) {
  if (n == 0) fail(ErrorCode::Config, "record count must be at least 1");
  double total = 0.0;
  for (const auto& [label, frac] : mix) {
    if (!(frac >= 0.0)) fail(ErrorCode::Config, "attack mix fractions must be non-negative");
    total += frac;
  }
  if (std::abs(total - 1.0) > 1e-9) fail(ErrorCode::Config, "attack mix fractions must sum to 1");

  // Largest-remainder allocation of the n records.
  std::vector<std::pair<Label, std::size_t>> counts;
  std::vector<std::pair<double, Label>> remainders;
  std::size_t assigned = 0;
  for (const auto& [label, frac] : mix) {
    const double exact = frac * static_cast<double>(n);
    const auto whole = static_cast<std::size_t>(std::floor(exact));
    counts.emplace_back(label, whole);
    remainders.emplace_back(exact - static_cast<double>(whole), label);
    assigned += whole;
  }
  std::stable_sort(remainders.begin(), remainders.end(),
                   [](const auto& a, const auto& b) { return a.first > b.first; });
  for (std::size_t k = 0; assigned < n; ++k, ++assigned) {
    const Label target = remainders[k % remainders.size()].second;
    for (auto& [label, count] : counts) {
      if (label == target) ++count;
    }
  }

  std::vector<Label> labels;
  labels.reserve(n);
  for (const auto& [label, count] : counts) labels.insert(labels.end(), count, label);
  Rng order = make_stream(seed, "datagen.order");
  std::shuffle(labels.begin(), labels.end(), order);

  Rng features = make_stream(seed, "datagen.features");
  Rng severity = make_stream(seed, "datagen.intensity");
  Dataset ds;
  ds.kind = kind;
  ds.feature_names = feature_names(kind);
  ds.records.reserve(n);
  for (Label label : labels) {
    double intensity = 0.0;
    if (label != Label::Normal) {
      if (opts.three_bands) {
        const int band = std::uniform_int_distribution<int>(0, 2)(severity);
        const double centre = (2.0 * band + 1.0) / 6.0;
        intensity = uniform(severity, centre - opts.band_half_width, centre + opts.band_half_width);
      } else {
        intensity = uniform_open_closed(severity);
      }
    }
    ds.records.push_back(synthesize_record(kind, label, intensity, features, opts));
  }
  return ds;
}

std::pair<Dataset, Dataset> split(const Dataset& ds, double train_fraction, std::uint64_t seed) {
  if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
    fail(ErrorCode::Config, "train fraction must lie strictly between 0 and 1");
  }
  std::array<std::vector<std::size_t>, kLabelCount> by_label;
  for (std::size_t r = 0; r < ds.records.size(); ++r) by_label[index_of(ds.records[r].label)].push_back(r);

  Rng rng = make_stream(seed, "datagen.split");
  std::vector<std::size_t> train_rows;
  std::vector<std::size_t> test_rows;
  for (Label label : kAllLabels) {
    auto& rows = by_label[index_of(label)];
    if (rows.empty()) continue;
    if (rows.size() < 2) {
      fail(ErrorCode::Validation,
           "cannot stratify: label '" + std::string(to_string(label)) + "' has fewer than 2 records");
    }
    std::shuffle(rows.begin(), rows.end(), rng);
    auto n_train = static_cast<std::size_t>(std::llround(train_fraction * static_cast<double>(rows.size())));
    n_train = std::clamp<std::size_t>(n_train, 1, rows.size() - 1);
    train_rows.insert(train_rows.end(), rows.begin(), rows.begin() + static_cast<std::ptrdiff_t>(n_train));
    test_rows.insert(test_rows.end(), rows.begin() + static_cast<std::ptrdiff_t>(n_train), rows.end());
  }
  std::sort(train_rows.begin(), train_rows.end());
  std::sort(test_rows.begin(), test_rows.end());

  auto gather = [&](const std::vector<std::size_t>& rows) {
    Dataset out;
    out.kind = ds.kind;
    out.feature_names = ds.feature_names;
    out.records.reserve(rows.size());
    for (std::size_t r : rows) out.records.push_back(ds.records[r]);
    return out;
  };
  return {gather(train_rows), gather(test_rows)};
}

Dataset filter_attack(const Dataset& ds, AttackType type) {
  Dataset out;
  out.kind = ds.kind;
  out.feature_names = ds.feature_names;
  const Label target = label_of(type);
  for (const auto& rec : ds.records) {
    if (rec.label == Label::Normal || rec.label == target) out.records.push_back(rec);
  }
  return out;
}

void write_csv(const Dataset& ds, std::ostream& data) {
  for (const auto& name : ds.feature_names) data << name << ',';
  data << "label\n";
  for (const auto& rec : ds.records) {
    for (double x : rec.features) data << format_double(x) << ',';
    data << to_string(rec.label) << '\n';
  }
}

void write_meta_csv(const Dataset& ds, std::ostream& meta) {
  meta << "row,intensity\n";
  for (std::size_t r = 0; r < ds.records.size(); ++r) meta << r << ',' << format_double(ds.records[r].intensity) << '\n';
}

namespace {

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::istringstream is(line);
  while (std::getline(is, cell, ',')) cells.push_back(cell);
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

double parse_cell(const std::string& cell, std::size_t line_no) {
  try {
    std::size_t used = 0;
    double x = std::stod(cell, &used);
    if (used != cell.size()) throw std::invalid_argument(cell);
    return x;
  } catch (const std::exception&) {
    fail(ErrorCode::Parse, "line " + std::to_string(line_no) + ": not a number '" + cell + "'");
  }
}

}  // namespace

Dataset read_csv(std::istream& data, std::istream* meta) {
  std::string line;
  if (!std::getline(data, line)) fail(ErrorCode::Parse, "empty CSV");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  auto header = split_line(line);
  if (header.empty() || header.back() != "label") fail(ErrorCode::Parse, "line 1: final column must be 'label'");
  header.pop_back();

  Dataset ds;
  if (header == feature_names(DatasetKind::NTD)) {
    ds.kind = DatasetKind::NTD;
  } else if (header == feature_names(DatasetKind::CLF)) {
    ds.kind = DatasetKind::CLF;
  } else {
    fail(ErrorCode::Parse, "line 1: header matches neither the NTD nor the CLF schema");
  }
  ds.feature_names = header;

  std::size_t line_no = 1;
  while (std::getline(data, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    auto cells = split_line(line);
    if (cells.size() != header.size() + 1) {
      fail(ErrorCode::Parse, "line " + std::to_string(line_no) + ": expected " +
                                 std::to_string(header.size() + 1) + " columns");
    }
    TelemetryRecord rec;
    for (std::size_t f = 0; f < header.size(); ++f) rec.features.push_back(parse_cell(cells[f], line_no));
    rec.label = parse_label(cells.back());
    ds.records.push_back(std::move(rec));
  }

  if (meta) {
    if (!std::getline(*meta, line)) fail(ErrorCode::Parse, "empty metadata CSV");
    std::size_t meta_line = 1;
    while (std::getline(*meta, line)) {
      ++meta_line;
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (line.empty()) continue;
      auto cells = split_line(line);
      if (cells.size() != 2) fail(ErrorCode::Parse, "metadata line " + std::to_string(meta_line) + ": expected 2 columns");
      const auto row = static_cast<std::size_t>(parse_cell(cells[0], meta_line));
      if (row >= ds.records.size()) fail(ErrorCode::Parse, "metadata line " + std::to_string(meta_line) + ": row out of range");
      ds.records[row].intensity = parse_cell(cells[1], meta_line);
    }
  }
  return ds;
}

}  // namespace secflow
