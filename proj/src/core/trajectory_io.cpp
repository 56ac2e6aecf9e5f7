#include "core/trajectory_io.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace prof {
namespace {

static_assert(std::endian::native == std::endian::little,
              "binary-v1 reader assumes a little-endian host");

constexpr char kMagic[6] = {'P', 'T', 'D', 'S', '1', '\n'};

using nlohmann::json;

std::vector<float> read_floats(std::istream& in, size_t count,
                               const char* what) {
  std::vector<float> out(count);
  in.read(reinterpret_cast<char*>(out.data()),
          std::streamsize(count * sizeof(float)));
  if (!in)
    raise(Errc::format, std::string("truncated ") + what + " payload");
  return out;
}

Dataset load_binary(std::istream& in) {
  char magic[6];
  in.read(magic, 6);
  if (!in || std::memcmp(magic, kMagic, 6) != 0)
    raise(Errc::format, "bad binary-v1 magic");
  uint64_t header_len = 0;
  in.read(reinterpret_cast<char*>(&header_len), 8);
  if (!in) raise(Errc::format, "truncated binary-v1 header length");
  if (header_len == 0 || header_len > (1u << 26))
    raise(Errc::format, "implausible binary-v1 header length");
  std::string header_text(header_len, '\0');
  in.read(header_text.data(), std::streamsize(header_len));
  if (!in) raise(Errc::format, "truncated binary-v1 header");

  json header = json::parse(header_text, nullptr, false);
  if (header.is_discarded() || !header.is_object())
    raise(Errc::format, "binary-v1 header is not valid JSON");
  if (header.value("version", 0) != 1)
    raise(Errc::format, "unsupported binary-v1 version");
  if (!header.contains("obs_dim") || !header.contains("act_dim") ||
      !header.contains("has_rewards") || !header.contains("lengths"))
    raise(Errc::format, "binary-v1 header is missing required fields");

  int32_t obs_dim = header["obs_dim"].get<int32_t>();
  int32_t act_dim = header["act_dim"].get<int32_t>();
  bool has_rewards = header["has_rewards"].get<bool>();
  std::string layout_name = header.value("layout", std::string("matrix"));
  StateLayout layout;
  if (layout_name == "matrix") {
    layout = StateLayout::kMatrix;
  } else if (layout_name == "per_transition") {
    layout = StateLayout::kPerTransition;
  } else {
    raise(Errc::format, "unknown binary-v1 layout '" + layout_name + "'");
  }
  if (obs_dim <= 0 || act_dim < 0)
    raise(Errc::format, "binary-v1 header has invalid dimensions");

  std::vector<Trajectory> trajectories;
  for (const auto& len_node : header["lengths"]) {
    int64_t len = len_node.get<int64_t>();
    if (len < 1) raise(Errc::format, "binary-v1 trajectory length < 1");
    size_t state_rows =
        layout == StateLayout::kMatrix ? size_t(len + 1) : size_t(2 * len);
    auto states = read_floats(in, state_rows * size_t(obs_dim), "state");
    auto actions = read_floats(in, size_t(len) * size_t(act_dim), "action");
    std::vector<float> rewards;
    if (has_rewards) rewards = read_floats(in, size_t(len), "reward");
    trajectories.push_back(
        layout == StateLayout::kMatrix
            ? Trajectory::matrix_form(obs_dim, act_dim, std::move(states),
                                      std::move(actions), std::move(rewards))
            : Trajectory::per_transition_form(obs_dim, act_dim,
                                              std::move(states),
                                              std::move(actions),
                                              std::move(rewards)));
  }
  if (in.peek() != std::char_traits<char>::eof())
    raise(Errc::format, "trailing bytes after binary-v1 payload");
  return Dataset(std::move(trajectories));
}

std::vector<float> flatten_rows(const json& rows, int64_t expect_rows,
                                int32_t expect_dim, const char* what) {
  if (!rows.is_array() || int64_t(rows.size()) != expect_rows)
    raise(Errc::format, std::string("bad ") + what + " row count");
  std::vector<float> flat;
  flat.reserve(size_t(expect_rows) * size_t(expect_dim));
  for (const auto& row : rows) {
    if (!row.is_array() || int32_t(row.size()) != expect_dim)
      raise(Errc::format, std::string("ragged ") + what + " row");
    for (const auto& v : row) {
      if (!v.is_number()) raise(Errc::format, std::string(what) + " element is not a number");
      flat.push_back(float(v.get<double>()));
    }
  }
  return flat;
}

Dataset load_text(std::istream& in) {
  std::vector<Trajectory> trajectories;
  std::string line;
  int64_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    json obj = json::parse(line, nullptr, false);
    if (obj.is_discarded() || !obj.is_object())
      raise(Errc::format, "line " + std::to_string(line_no) + ": not a JSON object");
    if (!obj.contains("observations") || !obj["observations"].is_array() ||
        obj["observations"].size() < 2)
      raise(Errc::format, "line " + std::to_string(line_no) +
                              ": needs >= 2 observation rows");
    int64_t state_rows = int64_t(obj["observations"].size());
    int64_t len = state_rows - 1;
    int32_t obs_dim = int32_t(obj["observations"][0].size());
    if (obs_dim == 0)
      raise(Errc::format, "line " + std::to_string(line_no) + ": empty observation row");
    int32_t act_dim = 0;
    if (obj.contains("actions") && obj["actions"].is_array() &&
        !obj["actions"].empty())
      act_dim = int32_t(obj["actions"][0].size());

    auto states = flatten_rows(obj["observations"], state_rows, obs_dim,
                               "observation");
    std::vector<float> actions;
    if (act_dim > 0)
      actions = flatten_rows(obj["actions"], len, act_dim, "action");
    std::vector<float> rewards;
    if (obj.contains("rewards") && !obj["rewards"].is_null()) {
      const auto& r = obj["rewards"];
      if (!r.is_array() || int64_t(r.size()) != len)
        raise(Errc::format, "line " + std::to_string(line_no) + ": bad reward count");
      for (const auto& v : r) rewards.push_back(float(v.get<double>()));
    }
    trajectories.push_back(Trajectory::matrix_form(
        obs_dim, act_dim, std::move(states), std::move(actions),
        std::move(rewards)));
  }
  if (trajectories.empty()) raise(Errc::format, "text-lines file has no trajectories");
  return Dataset(std::move(trajectories));
}

void save_binary(const Dataset& ds, std::ostream& out) {
  json header;
  header["version"] = 1;
  header["obs_dim"] = ds.obs_dim();
  header["act_dim"] = ds.act_dim();
  header["has_rewards"] = ds.has_rewards();
  StateLayout layout = ds.at(0).layout();
  for (const auto& t : ds.trajectories())
    if (t.layout() != layout)
      raise(Errc::format, "binary-v1 cannot mix state layouts in one file");
  header["layout"] =
      layout == StateLayout::kMatrix ? "matrix" : "per_transition";
  json lengths = json::array();
  for (const auto& t : ds.trajectories()) lengths.push_back(t.length());
  header["lengths"] = std::move(lengths);

  std::string header_text = header.dump();
  out.write(kMagic, 6);
  uint64_t header_len = header_text.size();
  out.write(reinterpret_cast<const char*>(&header_len), 8);
  out.write(header_text.data(), std::streamsize(header_text.size()));
  for (const auto& t : ds.trajectories()) {
    const auto& s = t.states_raw();
    const auto& a = t.actions_raw();
    const auto& r = t.rewards_raw();
    out.write(reinterpret_cast<const char*>(s.data()),
              std::streamsize(s.size() * sizeof(float)));
    out.write(reinterpret_cast<const char*>(a.data()),
              std::streamsize(a.size() * sizeof(float)));
    out.write(reinterpret_cast<const char*>(r.data()),
              std::streamsize(r.size() * sizeof(float)));
  }
}

void save_text(const Dataset& ds, std::ostream& out) {
  for (const auto& t : ds.trajectories()) {
    if (t.layout() != StateLayout::kMatrix)
      raise(Errc::format,
            "text-lines stores episodes; save per-transition data as binary-v1");
    json obj;
    json obs_rows = json::array();
    for (int64_t row = 0; row <= t.length(); ++row) {
      json r = json::array();
      const float* base = t.states_raw().data() + size_t(row) * size_t(t.obs_dim());
      for (int32_t d = 0; d < t.obs_dim(); ++d) r.push_back(double(base[d]));
      obs_rows.push_back(std::move(r));
    }
    obj["observations"] = std::move(obs_rows);
    json act_rows = json::array();
    for (int64_t i = 0; i < t.length(); ++i) {
      json r = json::array();
      for (float v : t.action(i)) r.push_back(double(v));
      act_rows.push_back(std::move(r));
    }
    obj["actions"] = std::move(act_rows);
    if (t.has_rewards()) {
      json r = json::array();
      for (float v : t.rewards_raw()) r.push_back(double(v));
      obj["rewards"] = std::move(r);
    }
    out << obj.dump() << '\n';
  }
}

}  // namespace

DatasetFormat dataset_format_from_name(const std::string& name) {
  if (name == "auto" || name.empty()) return DatasetFormat::kAuto;
  if (name == "binary-v1") return DatasetFormat::kBinaryV1;
  if (name == "text-lines") return DatasetFormat::kTextLines;
  raise(Errc::config, "unknown dataset format '" + name + "'");
}

Dataset load_dataset(const std::filesystem::path& path, DatasetFormat format) {
  std::ifstream in(path, std::ios::binary);
  if (!in) raise(Errc::io, "cannot open dataset file " + path.string());
  if (format == DatasetFormat::kAuto) {
    char probe[6] = {};
    in.read(probe, 6);
    bool is_binary = in.gcount() == 6 && std::memcmp(probe, kMagic, 6) == 0;
    in.clear();
    in.seekg(0);
    format = is_binary ? DatasetFormat::kBinaryV1 : DatasetFormat::kTextLines;
  }
  return format == DatasetFormat::kBinaryV1 ? load_binary(in) : load_text(in);
}

void save_dataset(const Dataset& dataset, const std::filesystem::path& path,
                  DatasetFormat format) {
  if (format == DatasetFormat::kAuto) format = DatasetFormat::kBinaryV1;
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) raise(Errc::io, "cannot open output file " + path.string());
  if (format == DatasetFormat::kBinaryV1)
    save_binary(dataset, out);
  else
    save_text(dataset, out);
  out.flush();
  if (!out) raise(Errc::io, "failed writing dataset " + path.string());
}

}  // namespace prof
