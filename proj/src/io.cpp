#include "mbc/io.hpp"

#include <openssl/sha.h>

#include <algorithm>
#include <bit>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <set>
#include <sstream>
#include <stdexcept>

namespace mbc::io {

namespace fs = std::filesystem;

namespace {

/// Reads optional fields of one JSON object, rejecting unknown keys and
/// reporting type errors with the dotted path of the field.
class FieldReader {
 public:
  FieldReader(const Json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw std::invalid_argument(where("") + ": expected an object");
  }

  template <typename T>
  bool read(const char* key, T& out) {
    seen_.insert(key);
    auto it = j_.find(key);
    if (it == j_.end()) return false;
    try {
      if constexpr (std::is_same_v<T, bool>) {
        if (!it->is_boolean()) throw std::invalid_argument("expected a boolean");
      } else if constexpr (std::is_integral_v<T>) {
        if (!it->is_number_integer()) throw std::invalid_argument("expected an integer");
      } else if constexpr (std::is_floating_point_v<T>) {
        if (!it->is_number()) throw std::invalid_argument("expected a number");
      } else if constexpr (std::is_same_v<T, std::string>) {
        if (!it->is_string()) throw std::invalid_argument("expected a string");
      }
      out = it->template get<T>();
    } catch (const std::exception& e) {
      throw std::invalid_argument(where(key) + ": " + e.what());
    }
    return true;
  }

  bool read(const char* key, IntRange& out) {
    seen_.insert(key);
    auto it = j_.find(key);
    if (it == j_.end()) return false;
    if (!it->is_array() || it->size() != 2 || !(*it)[0].is_number_integer() ||
        !(*it)[1].is_number_integer()) {
      throw std::invalid_argument(where(key) + ": expected [lo, hi] integers");
    }
    out = {(*it)[0].get<int>(), (*it)[1].get<int>()};
    return true;
  }

  const Json* child(const char* key) {
    seen_.insert(key);
    auto it = j_.find(key);
    return it == j_.end() ? nullptr : &*it;
  }

  std::string where(const std::string& key) const {
    if (key.empty()) return path_.empty() ? "<root>" : path_;
    return path_.empty() ? key : path_ + "." + key;
  }

  void finish() const {
    for (const auto& [k, v] : j_.items()) {
      if (!seen_.count(k)) throw std::invalid_argument(where(k) + ": unknown field");
    }
  }

 private:
  const Json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

void write_file(const fs::path& path, const std::string& bytes) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open '" + path.string() + "' for writing");
  out << bytes;
  if (!out) throw std::runtime_error("write failed for '" + path.string() + "'");
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

template <typename U>
void put_le(std::ostream& out, U value) {
  static_assert(std::is_unsigned_v<U>);
  char bytes[sizeof(U)];
  for (std::size_t i = 0; i < sizeof(U); ++i) bytes[i] = static_cast<char>((value >> (8 * i)) & 0xff);
  out.write(bytes, sizeof(U));
}

template <typename U>
U get_le(std::istream& in, const char* what) {
  unsigned char bytes[sizeof(U)];
  if (!in.read(reinterpret_cast<char*>(bytes), sizeof(U))) {
    throw std::runtime_error(std::string("checkpoint: truncated ") + what);
  }
  U value = 0;
  for (std::size_t i = 0; i < sizeof(U); ++i) value |= static_cast<U>(bytes[i]) << (8 * i);
  return value;
}

/// Integer element of an instance array; nlohmann would silently truncate 1.5.
template <typename I>
I integer(const Json& j, const char* what) {
  if (!j.is_number_integer()) throw std::invalid_argument(std::string(what) + " must be an integer");
  return j.get<I>();
}

template <typename I>
std::vector<I> integers(const Json& j, const char* what) {
  if (!j.is_array()) throw std::invalid_argument(std::string(what) + " must be an array");
  std::vector<I> out;
  out.reserve(j.size());
  for (const auto& e : j) out.push_back(integer<I>(e, what));
  return out;
}

const char* head_name(HeadKind h) { return h == HeadKind::Value ? "value" : "q"; }
const char* precision_name(Precision p) { return p == Precision::Single ? "single" : "double"; }

std::string csv_double(double v) {
  std::ostringstream ss;
  ss << std::setprecision(17) << v;
  return ss.str();
}

}  // namespace

std::string variant_of(const Graph& g) {
  if (g.directed()) return "mcn_dir";
  const bool unit = std::all_of(g.weights().begin(), g.weights().end(), [](Weight w) { return w == 1; });
  return unit ? "mcn" : "mcn_w";
}

Json to_json(const InstanceRecord& r) {
  const Graph& g = r.state.graph;
  Json j;
  j["id"] = r.id;
  j["variant"] = r.variant;
  j["directed"] = g.directed();
  j["nodes"] = g.nodes();
  j["weights"] = g.weights();
  Json arcs = Json::array();
  for (auto [u, v] : g.arcs()) arcs.push_back({u, v});
  j["arcs"] = std::move(arcs);
  j["budgets"] = {r.state.budgets.omega, r.state.budgets.phi, r.state.budgets.lambda};
  j["attacked"] = r.state.attacked;
  if (r.exact_value) j["exact_value"] = *r.exact_value;
  if (!r.action_values.empty()) {
    Json av = Json::array();
    for (auto [v, q] : r.action_values) av.push_back({v, q});
    j["action_values"] = std::move(av);
  }
  if (r.solve_seconds) j["solve_seconds"] = *r.solve_seconds;
  return j;
}

InstanceRecord instance_from_json(const Json& j) {
  FieldReader f(j, "");
  InstanceRecord r;
  if (!f.read("id", r.id)) throw std::invalid_argument("missing field 'id'");
  const std::string where = "instance '" + r.id + "'";
  auto need = [&](const char* key) -> const Json& {
    const Json* c = f.child(key);
    if (!c) throw std::invalid_argument(where + ": missing field '" + key + "'");
    return *c;
  };
  bool directed = false;
  if (!f.read("directed", directed)) throw std::invalid_argument(where + ": missing field 'directed'");
  std::vector<Arc> arcs;
  std::vector<NodeId> nodes;
  std::vector<Weight> weights;
  Budgets b;
  try {
    weights = integers<Weight>(need("weights"), "weights");
    if (const Json* n = f.child("nodes")) {
      nodes = integers<NodeId>(*n, "nodes");
    } else {
      nodes.resize(weights.size());
      for (std::size_t i = 0; i < nodes.size(); ++i) nodes[i] = static_cast<NodeId>(i);
    }
    for (const auto& a : need("arcs")) {
      if (!a.is_array() || a.size() != 2) throw std::invalid_argument("arc must be [u, v]");
      arcs.emplace_back(integer<NodeId>(a[0], "arc"), integer<NodeId>(a[1], "arc"));
    }
    const Json& bj = need("budgets");
    if (!bj.is_array() || bj.size() != 3) throw std::invalid_argument("budgets must be [omega, phi, lambda]");
    b = {integer<int>(bj[0], "budget"), integer<int>(bj[1], "budget"), integer<int>(bj[2], "budget")};
    if (b.omega < 0 || b.phi < 0 || b.lambda < 0) throw std::invalid_argument("negative budget");
    NodeSet attacked = integers<NodeId>(need("attacked"), "attacked");
    std::sort(attacked.begin(), attacked.end());
    r.state = make_state(Graph(std::move(nodes), std::move(weights), std::move(arcs), directed), b,
                         std::move(attacked));
    Weight ev = 0;
    if (f.read("exact_value", ev)) r.exact_value = ev;
    if (const Json* av = f.child("action_values")) {
      for (const auto& e : *av) {
        if (!e.is_array() || e.size() != 2) throw std::invalid_argument("action value must be [node, value]");
        r.action_values[integer<NodeId>(e[0], "action node")] = integer<Weight>(e[1], "action value");
      }
    }
    double secs = 0.0;
    if (f.read("solve_seconds", secs)) r.solve_seconds = secs;
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument(where + ": " + e.what());
  } catch (const std::invalid_argument& e) {
    const std::string msg = e.what();
    throw std::invalid_argument(msg.starts_with(where) ? msg : where + ": " + msg);
  }
  if (!f.read("variant", r.variant)) r.variant = variant_of(r.state.graph);
  if (r.variant != "mcn" && r.variant != "mcn_dir" && r.variant != "mcn_w") {
    throw std::invalid_argument(where + ": unknown variant '" + r.variant + "'");
  }
  // Weighted instances may happen to draw unit weights, so only mcn_w is lenient.
  const std::string implied = variant_of(r.state.graph);
  if (r.variant != implied && !(r.variant == "mcn_w" && implied == "mcn")) {
    throw std::invalid_argument(where + ": variant '" + r.variant + "' does not match the graph ('" +
                                implied + "')");
  }
  f.finish();
  return r;
}

void write_instances(std::ostream& out, const std::vector<InstanceRecord>& records) {
  out << kInstanceHeader << '\n';
  for (const auto& r : records) out << to_json(r).dump() << '\n';
}

std::vector<InstanceRecord> read_instances(std::istream& in) {
  std::vector<InstanceRecord> records;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line.front() == '#') continue;
    try {
      records.push_back(instance_from_json(Json::parse(line)));
    } catch (const std::exception& e) {
      throw std::invalid_argument("line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return records;
}

void write_instances(const fs::path& path, const std::vector<InstanceRecord>& records) {
  std::ostringstream ss;
  write_instances(ss, records);
  write_file(path, ss.str());
}

std::vector<InstanceRecord> read_instances(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open '" + path.string() + "'");
  try {
    return read_instances(in);
  } catch (const std::invalid_argument& e) {
    throw std::invalid_argument(path.string() + ": " + e.what());
  }
}

std::vector<SolvedInstance> solved_dataset(const std::vector<InstanceRecord>& records) {
  std::vector<SolvedInstance> out;
  out.reserve(records.size());
  for (const auto& r : records) {
    if (!r.exact_value) throw std::invalid_argument("instance '" + r.id + "' has no exact value");
    out.push_back({r.id, r.state, *r.exact_value});
  }
  return out;
}

Json to_json(const ModelConfig& c) {
  return {{"embed_dim", c.embed_dim},
          {"hidden_dim", c.hidden_dim},
          {"head_dim", c.head_dim},
          {"attention_blocks", c.attention_blocks},
          {"heads", c.heads},
          {"pool_replicas", c.pool_replicas},
          {"alpha", c.alpha},
          {"propagation_steps", c.propagation_steps},
          {"dropout", c.dropout},
          {"leaky_slope", c.leaky_slope},
          {"normalize", c.normalize},
          {"head", head_name(c.head)},
          {"precision", precision_name(c.precision)}};
}

namespace {

ModelConfig model_config_from(const Json& j, const std::string& path) {
  FieldReader f(j, path);
  ModelConfig c;
  f.read("embed_dim", c.embed_dim);
  f.read("hidden_dim", c.hidden_dim);
  f.read("head_dim", c.head_dim);
  f.read("attention_blocks", c.attention_blocks);
  f.read("heads", c.heads);
  f.read("pool_replicas", c.pool_replicas);
  f.read("alpha", c.alpha);
  f.read("propagation_steps", c.propagation_steps);
  f.read("dropout", c.dropout);
  f.read("leaky_slope", c.leaky_slope);
  f.read("normalize", c.normalize);
  std::string s;
  if (f.read("head", s)) {
    if (s == "value") c.head = HeadKind::Value;
    else if (s == "q") c.head = HeadKind::Q;
    else throw std::invalid_argument(f.where("head") + ": expected 'value' or 'q'");
  }
  if (f.read("precision", s)) {
    if (s == "single") c.precision = Precision::Single;
    else if (s == "double") c.precision = Precision::Double;
    else throw std::invalid_argument(f.where("precision") + ": expected 'single' or 'double'");
  }
  f.finish();
  try {
    c.validate();
  } catch (const std::exception& e) {
    throw std::invalid_argument(f.where("") + ": " + e.what());
  }
  return c;
}

DistributionConfig distribution_from(const Json& j, const std::string& path) {
  FieldReader f(j, path);
  DistributionConfig c;
  f.read("nodes", c.nodes);
  f.read("density_min", c.density_min);
  f.read("density_max", c.density_max);
  f.read("directed", c.directed);
  f.read("weights", c.weights);
  f.read("omega", c.omega);
  f.read("phi", c.phi);
  f.read("lambda", c.lambda);
  f.finish();
  try {
    c.validate();
  } catch (const std::exception& e) {
    throw std::invalid_argument(f.where("") + ": " + e.what());
  }
  return c;
}

void read_adam(FieldReader& f, AdamConfig& a) {
  f.read("lr", a.lr);
  f.read("beta1", a.beta1);
  f.read("beta2", a.beta2);
  f.read("adam_eps", a.eps);
}

Json adam_json(const AdamConfig& a) {
  return {{"lr", a.lr}, {"beta1", a.beta1}, {"beta2", a.beta2}, {"adam_eps", a.eps}};
}

TrainConfig train_config_from(const Json& j, const std::string& path) {
  FieldReader f(j, path);
  TrainConfig c;
  f.read("epochs", c.epochs);
  f.read("batch", c.batch);
  f.read("validate_every", c.validate_every);
  f.read("train_size", c.train_size);
  f.read("val_size", c.val_size);
  f.read("threads", c.threads);
  read_adam(f, c.adam);
  f.finish();
  if (c.epochs < 1 || c.batch < 1 || c.validate_every < 1 || c.train_size < 1 || c.val_size < 1) {
    throw std::invalid_argument(f.where("") + ": epochs, batch, validate_every and sizes must be >= 1");
  }
  return c;
}

RlConfig rl_config_from(const Json& j, const std::string& path) {
  FieldReader f(j, path);
  RlConfig c;
  f.read("episodes", c.episodes);
  f.read("max_updates", c.max_updates);
  f.read("batch", c.batch);
  f.read("target_sync", c.target_sync);
  f.read("capacity", c.capacity);
  f.read("memory_multiplier", c.memory_multiplier);
  f.read("episodes_per_step", c.episodes_per_step);
  f.read("eps_start", c.epsilon.start);
  f.read("eps_end", c.epsilon.end);
  f.read("eps_decay", c.epsilon.decay);
  f.read("threads", c.threads);
  read_adam(f, c.adam);
  f.finish();
  return c;
}

}  // namespace

ModelConfig model_config_from_json(const Json& j) { return model_config_from(j, "model"); }

Json to_json(const DistributionConfig& c) {
  return {{"nodes", {c.nodes.lo, c.nodes.hi}},
          {"density_min", c.density_min},
          {"density_max", c.density_max},
          {"directed", c.directed},
          {"weights", {c.weights.lo, c.weights.hi}},
          {"omega", {c.omega.lo, c.omega.hi}},
          {"phi", {c.phi.lo, c.phi.hi}},
          {"lambda", {c.lambda.lo, c.lambda.hi}}};
}

DistributionConfig distribution_from_json(const Json& j) { return distribution_from(j, "distribution"); }

Json to_json(const TrainConfig& c) {
  Json j = {{"epochs", c.epochs},         {"batch", c.batch},       {"validate_every", c.validate_every},
            {"train_size", c.train_size}, {"val_size", c.val_size}, {"threads", c.threads}};
  j.update(adam_json(c.adam));
  return j;
}

TrainConfig train_config_from_json(const Json& j) { return train_config_from(j, "train"); }

Json to_json(const RlConfig& c) {
  Json j = {{"episodes", c.episodes},
            {"max_updates", c.max_updates},
            {"batch", c.batch},
            {"target_sync", c.target_sync},
            {"capacity", c.capacity},
            {"memory_multiplier", c.memory_multiplier},
            {"episodes_per_step", c.episodes_per_step},
            {"eps_start", c.epsilon.start},
            {"eps_end", c.epsilon.end},
            {"eps_decay", c.epsilon.decay},
            {"threads", c.threads}};
  j.update(adam_json(c.adam));
  return j;
}

RlConfig rl_config_from_json(const Json& j) { return rl_config_from(j, "rl"); }

Json to_json(const ExperimentConfig& c) {
  Json j;
  if (c.distribution_name == "inline") {
    j["distribution"] = to_json(c.distribution);
  } else {
    j["distribution"] = c.distribution_name;
  }
  j["model"] = to_json(c.model);
  j["train"] = to_json(c.train);
  j["rl"] = to_json(c.rl);
  j["seed"] = c.seed;
  j["output_dir"] = c.output_dir.string();
  return j;
}

ExperimentConfig experiment_from_json(const Json& j) {
  FieldReader f(j, "");
  ExperimentConfig c;
  if (const Json* d = f.child("distribution")) {
    if (d->is_string()) {
      c.distribution_name = d->get<std::string>();
      try {
        c.distribution = DistributionConfig::preset(c.distribution_name);
      } catch (const std::exception& e) {
        throw std::invalid_argument(std::string("distribution: ") + e.what());
      }
    } else {
      c.distribution_name = "inline";
      c.distribution = distribution_from(*d, "distribution");
    }
  }
  c.model = ModelConfig::desk(c.distribution.nodes.hi);
  if (const Json* m = f.child("model")) {
    // Fields absent from the object keep the desk defaults for this distribution.
    Json merged = to_json(c.model);
    if (!m->is_object()) throw std::invalid_argument("model: expected an object");
    for (const auto& [k, v] : m->items()) {
      if (!merged.contains(k)) throw std::invalid_argument("model." + k + ": unknown field");
      merged[k] = v;
    }
    c.model = model_config_from(merged, "model");
  }
  if (const Json* t = f.child("train")) c.train = train_config_from(*t, "train");
  if (const Json* r = f.child("rl")) c.rl = rl_config_from(*r, "rl");
  f.read("seed", c.seed);
  std::string out;
  if (f.read("output_dir", out)) c.output_dir = out;
  f.finish();
  return c;
}

ExperimentConfig read_experiment(const fs::path& path) {
  const std::string text = read_file(path);
  Json j;
  try {
    j = Json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw std::invalid_argument(path.string() + ": " + e.what());
  }
  try {
    return experiment_from_json(j);
  } catch (const std::exception& e) {
    throw std::invalid_argument(path.string() + ": " + e.what());
  }
}

void write_checkpoint(std::ostream& out, const Checkpoint& ckpt) {
  Json header;
  header["model"] = to_json(ckpt.net.config);
  header["stage"] = ckpt.stage ? Json(ckpt.stage->label()) : Json(nullptr);
  header["metadata"] = ckpt.metadata;
  const std::string h = header.dump();
  out.write("MBCK", 4);
  put_le<std::uint32_t>(out, kCheckpointVersion);
  put_le<std::uint32_t>(out, static_cast<std::uint32_t>(h.size()));
  out.write(h.data(), static_cast<std::streamsize>(h.size()));
  put_le<std::uint64_t>(out, ckpt.net.params.size());
  for (double p : ckpt.net.params) put_le<std::uint64_t>(out, std::bit_cast<std::uint64_t>(p));
}

Checkpoint read_checkpoint(std::istream& in) {
  char magic[4];
  if (!in.read(magic, 4) || std::memcmp(magic, "MBCK", 4) != 0) {
    throw std::runtime_error("checkpoint: bad magic (not a checkpoint file)");
  }
  const auto version = get_le<std::uint32_t>(in, "version");
  if (version != kCheckpointVersion) {
    throw std::runtime_error("checkpoint: unsupported version " + std::to_string(version));
  }
  const auto header_len = get_le<std::uint32_t>(in, "header length");
  if (header_len > (1u << 24)) throw std::runtime_error("checkpoint: header length out of range");
  std::string h(header_len, '\0');
  if (!in.read(h.data(), header_len)) throw std::runtime_error("checkpoint: truncated header");
  Checkpoint ckpt;
  try {
    const Json header = Json::parse(h);
    ckpt.net.config = model_config_from(header.at("model"), "model");
    if (!header.at("stage").is_null()) ckpt.stage = StageKey::parse(header.at("stage").get<std::string>());
    ckpt.metadata = header.at("metadata");
  } catch (const std::exception& e) {
    throw std::runtime_error(std::string("checkpoint: bad header: ") + e.what());
  }
  const auto count = get_le<std::uint64_t>(in, "parameter count");
  const std::size_t expected = parameter_count(ckpt.net.config);
  if (count != expected) {
    throw std::runtime_error("checkpoint: parameter count " + std::to_string(count) +
                             " does not match model config (" + std::to_string(expected) + ")");
  }
  ckpt.net.params.resize(count);
  for (auto& p : ckpt.net.params) p = std::bit_cast<double>(get_le<std::uint64_t>(in, "parameters"));
  if (in.peek() != std::char_traits<char>::eof()) {
    throw std::runtime_error("checkpoint: trailing bytes after parameters");
  }
  return ckpt;
}

void write_checkpoint(const fs::path& path, const Checkpoint& ckpt) {
  std::ostringstream ss(std::ios::binary);
  write_checkpoint(ss, ckpt);
  write_file(path, ss.str());
}

Checkpoint read_checkpoint(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open '" + path.string() + "'");
  try {
    return read_checkpoint(in);
  } catch (const std::exception& e) {
    throw std::runtime_error(path.string() + ": " + e.what());
  }
}

void write_expert_list(const fs::path& dir, const ExpertList& experts) {
  fs::create_directories(dir);
  Json list = Json::array();
  for (const auto& [stage, net] : experts.experts()) {
    const std::string file = stage.label() + ".ckpt";
    write_checkpoint(dir / file, Checkpoint{net, stage, Json::object()});
    list.push_back({{"stage", stage.label()}, {"file", file}});
  }
  write_file(dir / "experts.json", Json{{"experts", list}}.dump(2) + "\n");
}

ExpertList read_expert_list(const fs::path& dir) {
  const fs::path index = dir / "experts.json";
  Json j;
  try {
    j = Json::parse(read_file(index));
  } catch (const nlohmann::json::exception& e) {
    throw std::runtime_error(index.string() + ": " + e.what());
  }
  ExpertList experts;
  for (const auto& e : j.at("experts")) {
    const StageKey stage = StageKey::parse(e.at("stage").get<std::string>());
    Checkpoint c = read_checkpoint(dir / e.at("file").get<std::string>());
    if (c.stage != stage) {
      throw std::runtime_error(index.string() + ": checkpoint stage does not match entry " + stage.label());
    }
    if (!experts.experts().empty() && !(experts.experts().begin()->second.config == c.net.config)) {
      throw std::runtime_error(index.string() + ": experts disagree on the model config");
    }
    experts.add(stage, std::move(c.net));
  }
  return experts;
}

std::string content_hash(const std::string& bytes) {
  const std::string blob = "blob " + std::to_string(bytes.size()) + '\0' + bytes;
  unsigned char digest[SHA_DIGEST_LENGTH];
  SHA1(reinterpret_cast<const unsigned char*>(blob.data()), blob.size(), digest);
  std::ostringstream ss;
  for (unsigned char c : digest) ss << std::hex << std::setw(2) << std::setfill('0') << int(c);
  return ss.str();
}

std::string file_hash(const fs::path& path) { return content_hash(read_file(path)); }

void write_curve_csv(const fs::path& path, const std::vector<CurvePoint>& curve) {
  std::ostringstream ss;
  ss << "stage,update,train_mse,val_mse,wall_ms\n";
  for (const auto& p : curve) {
    ss << p.stage << ',' << p.update << ',' << csv_double(p.train_mse) << ',' << csv_double(p.val_mse)
       << ',' << csv_double(p.wall_ms) << '\n';
  }
  write_file(path, ss.str());
}

void write_rl_curve_csv(const fs::path& path, const std::vector<RlCurvePoint>& curve) {
  std::ostringstream ss;
  ss << "update,loss,epsilon,episodes_seen\n";
  for (const auto& p : curve) {
    ss << p.update << ',' << csv_double(p.loss) << ',' << csv_double(p.epsilon) << ','
       << p.episodes_seen << '\n';
  }
  write_file(path, ss.str());
}

void append_report_csv(const fs::path& path, const ReportRow& row) {
  const bool fresh = !fs::exists(path) || fs::file_size(path) == 0;
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::app);
  if (!out) throw std::runtime_error("cannot open '" + path.string() + "' for writing");
  if (fresh) out << kReportHeader << '\n';
  const auto& m = row.metrics;
  out << row.dataset_id << ',' << row.policy << ',' << m.n_instances << ',' << m.n_excluded << ','
      << csv_double(m.eta) << ',' << csv_double(m.zeta) << ',' << csv_double(m.mean_time_s) << ','
      << row.seed << '\n';
}

void write_inspection_csv(std::ostream& out, const std::vector<ActionValueRow>& rows) {
  out << "node,value,optimal\n";
  for (const auto& r : rows) out << r.node << ',' << csv_double(r.value) << ',' << (r.optimal ? 1 : 0) << '\n';
}

}  // namespace mbc::io
