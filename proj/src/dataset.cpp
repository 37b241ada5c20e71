#include "o2orl/dataset.hpp"

#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "o2orl/nn_io.hpp"

namespace o2orl {

std::string to_string(Tier tier) {
  switch (tier) {
    case Tier::random: return "random";
    case Tier::medium: return "medium";
    case Tier::medium_replay: return "medium_replay";
    case Tier::medium_expert: return "medium_expert";
    case Tier::expert: return "expert";
  }
  throw std::logic_error("to_string(Tier): invalid tier");
}

Tier tier_from_string(const std::string& name) {
  if (name == "random") return Tier::random;
  if (name == "medium") return Tier::medium;
  if (name == "medium_replay") return Tier::medium_replay;
  if (name == "medium_expert") return Tier::medium_expert;
  if (name == "expert") return Tier::expert;
  throw std::invalid_argument("unknown dataset tier '" + name + "'");
}

void ReferenceScores::validate() const {
  if (!std::isfinite(r_random) || !std::isfinite(r_expert))
    throw std::invalid_argument("ReferenceScores: non-finite reference return");
  if (!(r_expert > r_random))
    throw std::invalid_argument("ReferenceScores: R_expert must exceed R_random");
}

double normalize_return(double episodic_return, const ReferenceScores& refs) {
  refs.validate();
  return (episodic_return - refs.r_random) / (refs.r_expert - refs.r_random);
}

std::pair<std::int64_t, std::int64_t> OfflineDataset::episode_range(std::int64_t episode) const {
  if (episode < 0 || episode >= n_episodes()) throw std::out_of_range("episode index out of range");
  const std::int64_t begin = episode_starts[static_cast<std::size_t>(episode)];
  const std::int64_t end =
      episode + 1 < n_episodes() ? episode_starts[static_cast<std::size_t>(episode) + 1] : size();
  return {begin, end};
}

double OfflineDataset::episode_return_of(std::int64_t episode) const {
  const auto [begin, end] = episode_range(episode);
  double total = 0.0;
  for (std::int64_t i = begin; i < end; ++i) total += transitions[static_cast<std::size_t>(i)].reward;
  return total;
}

double OfflineDataset::mean_normalized_return() const {
  if (n_episodes() == 0) throw std::logic_error("mean_normalized_return: empty dataset");
  double total = 0.0;
  for (std::int64_t e = 0; e < n_episodes(); ++e) total += normalize_return(episode_return_of(e), refs);
  return total / static_cast<double>(n_episodes());
}

void OfflineDataset::validate() const {
  const EnvSpec spec = make_env_spec(env_id);
  if (spec.obs_dim != obs_dim || spec.act_dim != act_dim)
    throw std::invalid_argument("OfflineDataset: dims do not match env '" + env_id + "'");
  refs.validate();
  if (transitions.empty()) throw std::invalid_argument("OfflineDataset: no transitions");
  if (episode_starts.empty() || episode_starts.front() != 0)
    throw std::invalid_argument("OfflineDataset: episode markers must start at 0");
  for (std::size_t e = 0; e < episode_starts.size(); ++e) {
    const std::int64_t begin = episode_starts[e];
    const std::int64_t end = e + 1 < episode_starts.size() ? episode_starts[e + 1] : size();
    if (end <= begin || end > size())
      throw std::invalid_argument("OfflineDataset: episode markers do not partition transitions");
    if (end - begin > max_episode_steps)
      throw std::invalid_argument("OfflineDataset: episode longer than the task limit");
  }
  for (const Transition& t : transitions) {
    if (t.obs.size() != obs_dim || t.next_obs.size() != obs_dim || t.action.size() != act_dim)
      throw std::invalid_argument("OfflineDataset: transition dims mismatch");
    for (int d = 0; d < act_dim; ++d) {
      if (t.action(d) < static_cast<float>(spec.action_low(d)) ||
          t.action(d) > static_cast<float>(spec.action_high(d)))
        throw std::invalid_argument("OfflineDataset: action outside bounds");
    }
  }
}

namespace {
constexpr const char* kMagic = "o2orl-dataset v1";
}

void save_dataset(const std::string& path, const OfflineDataset& ds) {
  ds.validate();
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("save_dataset: cannot open '" + path + "' for writing");
  out << kMagic << '\n';
  out << "env_id " << ds.env_id << '\n';
  out << "tier " << to_string(ds.tier) << '\n';
  out << "obs_dim " << ds.obs_dim << '\n';
  out << "act_dim " << ds.act_dim << '\n';
  out << "max_episode_steps " << ds.max_episode_steps << '\n';
  out << "r_max " << io::format_double(ds.r_max) << '\n';
  out << "n_transitions " << ds.size() << '\n';
  out << "n_episodes " << ds.n_episodes() << '\n';
  out << "n_reference_episodes " << ds.refs.n_reference_episodes << '\n';
  out << "r_random " << io::format_double(ds.refs.r_random) << '\n';
  out << "r_expert " << io::format_double(ds.refs.r_expert) << '\n';
  out << "seed " << ds.seed << '\n';
  out << "end\n";

  const auto n = static_cast<std::size_t>(ds.size());
  std::vector<float> buf;
  auto write_block = [&](auto&& get, int width) {
    buf.resize(n * static_cast<std::size_t>(width));
    for (std::size_t i = 0; i < n; ++i)
      for (int d = 0; d < width; ++d) buf[i * static_cast<std::size_t>(width) + static_cast<std::size_t>(d)] = get(ds.transitions[i], d);
    io::write_f32(out, buf.data(), buf.size());
  };
  write_block([](const Transition& t, int d) { return t.obs(d); }, ds.obs_dim);
  write_block([](const Transition& t, int d) { return t.action(d); }, ds.act_dim);
  write_block([](const Transition& t, int) { return t.reward; }, 1);
  write_block([](const Transition& t, int d) { return t.next_obs(d); }, ds.obs_dim);
  std::vector<std::int32_t> flags(n);
  for (std::size_t i = 0; i < n; ++i) flags[i] = ds.transitions[i].terminal ? 1 : 0;
  io::write_i32(out, flags.data(), flags.size());
  std::vector<std::int32_t> starts(ds.episode_starts.size());
  for (std::size_t i = 0; i < starts.size(); ++i) starts[i] = static_cast<std::int32_t>(ds.episode_starts[i]);
  io::write_i32(out, starts.data(), starts.size());
  if (!out) throw std::runtime_error("save_dataset: write to '" + path + "' failed");
}

OfflineDataset load_dataset(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("load_dataset: cannot open '" + path + "'");
  io::expect_line(in, kMagic, "load_dataset");
  OfflineDataset ds;
  ds.env_id = io::header_field(in, "env_id", "load_dataset");
  ds.tier = tier_from_string(io::header_field(in, "tier", "load_dataset"));
  auto read_int = [&](const char* key) {
    std::istringstream ss(io::header_field(in, key, "load_dataset"));
    std::int64_t v = 0;
    if (!(ss >> v)) throw std::runtime_error(std::string("load_dataset: malformed ") + key);
    return v;
  };
  auto read_double = [&](const char* key) {
    std::istringstream ss(io::header_field(in, key, "load_dataset"));
    double v = 0;
    if (!(ss >> v)) throw std::runtime_error(std::string("load_dataset: malformed ") + key);
    return v;
  };
  ds.obs_dim = static_cast<int>(read_int("obs_dim"));
  ds.act_dim = static_cast<int>(read_int("act_dim"));
  ds.max_episode_steps = static_cast<int>(read_int("max_episode_steps"));
  ds.r_max = read_double("r_max");
  const std::int64_t n = read_int("n_transitions");
  const std::int64_t n_episodes = read_int("n_episodes");
  ds.refs.n_reference_episodes = static_cast<int>(read_int("n_reference_episodes"));
  ds.refs.r_random = read_double("r_random");
  ds.refs.r_expert = read_double("r_expert");
  ds.refs.rmax_times_t = ds.r_max * ds.max_episode_steps;
  {
    std::istringstream ss(io::header_field(in, "seed", "load_dataset"));
    if (!(ss >> ds.seed)) throw std::runtime_error("load_dataset: malformed seed");
  }
  io::expect_line(in, "end", "load_dataset");
  if (n <= 0 || n_episodes <= 0) throw std::runtime_error("load_dataset: empty dataset");

  const auto count = static_cast<std::size_t>(n);
  ds.transitions.resize(count);
  std::vector<float> buf;
  auto read_block = [&](auto&& set, int width) {
    buf.resize(count * static_cast<std::size_t>(width));
    io::read_f32(in, buf.data(), buf.size(), "load_dataset");
    for (std::size_t i = 0; i < count; ++i)
      for (int d = 0; d < width; ++d) set(ds.transitions[i], d, buf[i * static_cast<std::size_t>(width) + static_cast<std::size_t>(d)]);
  };
  for (auto& t : ds.transitions) {
    t.obs.resize(ds.obs_dim);
    t.action.resize(ds.act_dim);
    t.next_obs.resize(ds.obs_dim);
  }
  read_block([](Transition& t, int d, float v) { t.obs(d) = v; }, ds.obs_dim);
  read_block([](Transition& t, int d, float v) { t.action(d) = v; }, ds.act_dim);
  read_block([](Transition& t, int, float v) { t.reward = v; }, 1);
  read_block([](Transition& t, int d, float v) { t.next_obs(d) = v; }, ds.obs_dim);
  std::vector<std::int32_t> flags(count);
  io::read_i32(in, flags.data(), flags.size(), "load_dataset");
  for (std::size_t i = 0; i < count; ++i) ds.transitions[i].terminal = flags[i] != 0;
  std::vector<std::int32_t> starts(static_cast<std::size_t>(n_episodes));
  io::read_i32(in, starts.data(), starts.size(), "load_dataset");
  ds.episode_starts.assign(starts.begin(), starts.end());
  char extra = 0;
  if (in.read(&extra, 1); in.gcount() != 0)
    throw std::runtime_error("load_dataset: trailing bytes after payload");
  ds.validate();
  return ds;
}

}  // namespace o2orl
