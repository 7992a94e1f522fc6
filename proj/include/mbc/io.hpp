#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "mbc/curriculum.hpp"
#include "mbc/eval.hpp"
#include "mbc/game.hpp"
#include "mbc/rl.hpp"
#include "mbc/value_net.hpp"

namespace mbc::io {

using Json = nlohmann::json;

/// One game instance per line of an instance file.
struct InstanceRecord {
  std::string id;
  std::string variant;  // mcn, mcn_dir or mcn_w
  GameState state;
  std::optional<Weight> exact_value;
  std::map<NodeId, Weight> action_values;
  std::optional<double> solve_seconds;

  bool operator==(const InstanceRecord&) const = default;
};

std::string variant_of(const Graph& g);

Json to_json(const InstanceRecord& r);
InstanceRecord instance_from_json(const Json& j);

inline constexpr const char* kInstanceHeader = "# mbc instances v1";

void write_instances(std::ostream& out, const std::vector<InstanceRecord>& records);
/// Skips '#' comment and blank lines; errors name the offending line.
std::vector<InstanceRecord> read_instances(std::istream& in);
void write_instances(const std::filesystem::path& path, const std::vector<InstanceRecord>& records);
std::vector<InstanceRecord> read_instances(const std::filesystem::path& path);

/// Records carrying an exact value; throws naming the first record without one.
std::vector<SolvedInstance> solved_dataset(const std::vector<InstanceRecord>& records);

Json to_json(const ModelConfig& c);
ModelConfig model_config_from_json(const Json& j);
Json to_json(const DistributionConfig& c);
DistributionConfig distribution_from_json(const Json& j);
Json to_json(const TrainConfig& c);
TrainConfig train_config_from_json(const Json& j);
Json to_json(const RlConfig& c);
RlConfig rl_config_from_json(const Json& j);

/// Everything needed to reproduce an experiment.
struct ExperimentConfig {
  std::string distribution_name = "desk";  // preset name, or "inline"
  DistributionConfig distribution = DistributionConfig::preset("desk");
  ModelConfig model = ModelConfig::desk(12);
  TrainConfig train{};
  RlConfig rl{};
  std::uint64_t seed = 0;
  std::filesystem::path output_dir = "out";
};

Json to_json(const ExperimentConfig& c);
/// Unknown keys and type errors are reported with their JSON path.
ExperimentConfig experiment_from_json(const Json& j);
ExperimentConfig read_experiment(const std::filesystem::path& path);

// Checkpoints: "MBCK", u32 version, u32 header length, JSON header
// (model config, stage, metadata), u64 parameter count, little-endian f64s.
inline constexpr std::uint32_t kCheckpointVersion = 1;

struct Checkpoint {
  ValueNetwork net;
  std::optional<StageKey> stage;
  Json metadata = Json::object();
};

void write_checkpoint(std::ostream& out, const Checkpoint& ckpt);
Checkpoint read_checkpoint(std::istream& in);
void write_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt);
Checkpoint read_checkpoint(const std::filesystem::path& path);

/// One checkpoint per stage plus experts.json listing them.
void write_expert_list(const std::filesystem::path& dir, const ExpertList& experts);
ExpertList read_expert_list(const std::filesystem::path& dir);

/// Git blob hash ("blob <len>\0" + content, SHA-1) as hex.
std::string content_hash(const std::string& bytes);
std::string file_hash(const std::filesystem::path& path);

void write_curve_csv(const std::filesystem::path& path, const std::vector<CurvePoint>& curve);
void write_rl_curve_csv(const std::filesystem::path& path, const std::vector<RlCurvePoint>& curve);

struct ReportRow {
  std::string dataset_id;
  std::string policy;
  MetricsReport metrics;
  std::uint64_t seed = 0;
};

inline constexpr const char* kReportHeader =
    "dataset_id,policy,n_instances,n_excluded,eta,zeta,mean_time_s,seed";

/// Appends a row, writing the header first when the file is new or empty.
void append_report_csv(const std::filesystem::path& path, const ReportRow& row);

void write_inspection_csv(std::ostream& out, const std::vector<ActionValueRow>& rows);

}  // namespace mbc::io
