#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "secflow/model.hpp"
#include "secflow/rng.hpp"

namespace secflow {

enum class DatasetKind { NTD, CLF };
std::string_view to_string(DatasetKind kind);
DatasetKind parse_dataset_kind(std::string_view name);

/// Class declaration order doubles as the prediction tie-break order.
enum class Label { Normal, DoS, Probe, U2R, R2L };
inline constexpr std::array<Label, 5> kAllLabels = {Label::Normal, Label::DoS, Label::Probe, Label::U2R,
                                                    Label::R2L};
inline constexpr std::size_t kLabelCount = kAllLabels.size();

std::string_view to_string(Label label);
Label parse_label(std::string_view name);
constexpr std::size_t index_of(Label label) { return static_cast<std::size_t>(label); }
Label label_of(AttackType type);
std::optional<AttackType> attack_of(Label label);

struct TelemetryRecord {
  std::vector<double> features;
  Label label = Label::Normal;
  double intensity = 0.0;  // hidden ground truth; never serialised with the features
};

struct Dataset {
  DatasetKind kind = DatasetKind::NTD;
  std::vector<std::string> feature_names;
  std::vector<TelemetryRecord> records;

  std::size_t size() const { return records.size(); }
};

/// NTD: duration, protocol_type, src_bytes, dst_bytes, packet_count,
///      srv_count, serror_rate, same_srv_rate.
/// CLF: cpu_util, ram_util, bw_util.
const std::vector<std::string>& feature_names(DatasetKind kind);

using AttackMix = std::map<Label, double>;
AttackMix default_attack_mix();

struct GeneratorOptions {
  /// Scales every attack signature shift.
  double separation = 1.0;
  /// When set, attack intensities are drawn from three narrow bands centred on
  /// 1/6, 1/2 and 5/6 (half-width `band_half_width`) instead of U(0, 1].
  bool three_bands = false;
  double band_half_width = 0.05;
};

/// Draws one record of `label` at `intensity` (0 for Normal).
TelemetryRecord synthesize_record(DatasetKind kind, Label label, double intensity, Rng& rng,
                                  const GeneratorOptions& opts = {});

/// Label counts follow `mix` by largest remainder; records are shuffled.
/// Throws Config when fractions do not sum to 1 (within 1e-9) or n == 0.
Dataset generate(DatasetKind kind, std::size_t n, const AttackMix& mix, std::uint64_t seed,
                 const GeneratorOptions& opts = {});

/// Stratified split. Throws Config for fractions outside (0, 1) and
/// Validation when a present label has fewer than 2 records.
std::pair<Dataset, Dataset> split(const Dataset& ds, double train_fraction, std::uint64_t seed);

/// Records of `type` plus all Normal records.
Dataset filter_attack(const Dataset& ds, AttackType type);

void write_csv(const Dataset& ds, std::ostream& data);
/// Companion "row,intensity" file.
void write_meta_csv(const Dataset& ds, std::ostream& meta);
/// The kind is inferred from the header. Intensities are filled from `meta` when given.
Dataset read_csv(std::istream& data, std::istream* meta = nullptr);

}  // namespace secflow
