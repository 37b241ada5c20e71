#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <fstream>
#include <sstream>

#include "o2orl/agent.hpp"
#include "o2orl/agent_io.hpp"
#include "o2orl/alpha.hpp"
#include "o2orl/cli.hpp"
#include "o2orl/datagen.hpp"
#include "o2orl/dataset.hpp"
#include "o2orl/env.hpp"
#include "o2orl/nn.hpp"
#include "o2orl/nn_io.hpp"
#include "o2orl/replay.hpp"
#include "o2orl/train.hpp"

namespace py = pybind11;
using namespace o2orl;

PYBIND11_MODULE(_core, m) {
  m.doc() = "Offline-to-online RL toolkit: TD3+BC pretraining, randomized critic "
            "ensembles, replay downsampling, and adaptive behavior-cloning weights";

  py::class_<EnvSpec>(m, "EnvSpec")
      .def_readonly("env_id", &EnvSpec::env_id)
      .def_readonly("obs_dim", &EnvSpec::obs_dim)
      .def_readonly("act_dim", &EnvSpec::act_dim)
      .def_readonly("action_low", &EnvSpec::action_low)
      .def_readonly("action_high", &EnvSpec::action_high)
      .def_readonly("max_episode_steps", &EnvSpec::max_episode_steps)
      .def_readonly("r_max", &EnvSpec::r_max)
      .def_readonly("dt", &EnvSpec::dt)
      .def("__repr__", [](const EnvSpec& s) { return describe(s); });
  m.def("make_env_spec", &make_env_spec, py::arg("env_id"));

  py::class_<StepResult>(m, "StepResult")
      .def_readonly("obs", &StepResult::obs)
      .def_readonly("reward", &StepResult::reward)
      .def_readonly("terminal", &StepResult::terminal)
      .def_readonly("truncated", &StepResult::truncated);

  py::class_<Env>(m, "Env")
      .def(py::init<EnvSpec, std::uint64_t>(), py::arg("spec"), py::arg("seed"))
      .def("reset", py::overload_cast<>(&Env::reset))
      .def("reset", py::overload_cast<std::uint64_t>(&Env::reset), py::arg("seed"))
      .def("step", &Env::step, py::arg("action"))
      .def_property_readonly("spec", &Env::spec)
      .def_property_readonly("steps", &Env::steps)
      .def_property_readonly("finished", &Env::finished);

  py::class_<Transition>(m, "Transition")
      .def(py::init<>())
      .def_readwrite("obs", &Transition::obs)
      .def_readwrite("action", &Transition::action)
      .def_readwrite("next_obs", &Transition::next_obs)
      .def_readwrite("reward", &Transition::reward)
      .def_readwrite("terminal", &Transition::terminal);

  py::enum_<Tier>(m, "Tier")
      .value("random", Tier::random)
      .value("medium", Tier::medium)
      .value("medium_replay", Tier::medium_replay)
      .value("medium_expert", Tier::medium_expert)
      .value("expert", Tier::expert);

  py::class_<ReferenceScores>(m, "ReferenceScores")
      .def(py::init<>())
      .def_readwrite("r_random", &ReferenceScores::r_random)
      .def_readwrite("r_expert", &ReferenceScores::r_expert)
      .def_readwrite("rmax_times_t", &ReferenceScores::rmax_times_t)
      .def_readwrite("n_reference_episodes", &ReferenceScores::n_reference_episodes)
      .def("validate", &ReferenceScores::validate);
  m.def("normalize_return", &normalize_return, py::arg("episodic_return"), py::arg("refs"));

  py::class_<OfflineDataset>(m, "OfflineDataset")
      .def(py::init<>())
      .def_readwrite("env_id", &OfflineDataset::env_id)
      .def_readwrite("tier", &OfflineDataset::tier)
      .def_readwrite("obs_dim", &OfflineDataset::obs_dim)
      .def_readwrite("act_dim", &OfflineDataset::act_dim)
      .def_readwrite("max_episode_steps", &OfflineDataset::max_episode_steps)
      .def_readwrite("r_max", &OfflineDataset::r_max)
      .def_readwrite("refs", &OfflineDataset::refs)
      .def_readwrite("seed", &OfflineDataset::seed)
      .def_readwrite("transitions", &OfflineDataset::transitions)
      .def_readwrite("episode_starts", &OfflineDataset::episode_starts)
      .def("size", &OfflineDataset::size)
      .def("n_episodes", &OfflineDataset::n_episodes)
      .def("episode_return_of", &OfflineDataset::episode_return_of, py::arg("episode"))
      .def("mean_normalized_return", &OfflineDataset::mean_normalized_return)
      .def("validate", &OfflineDataset::validate);
  m.def("save_dataset", &save_dataset, py::arg("path"), py::arg("dataset"));
  m.def("load_dataset", &load_dataset, py::arg("path"));

  py::enum_<Origin>(m, "Origin").value("offline", Origin::offline).value("online", Origin::online);
  py::enum_<DownsampleMode>(m, "DownsampleMode")
      .value("random", DownsampleMode::random)
      .value("prioritized", DownsampleMode::prioritized);

  py::class_<ReplayBuffer>(m, "ReplayBuffer")
      .def(py::init<std::size_t, std::uint64_t>(), py::arg("capacity"), py::arg("seed"))
      .def("push", &ReplayBuffer::push, py::arg("transition"), py::arg("origin"),
           py::arg("episode_id") = -1,
           py::arg("episodic_return") = std::numeric_limits<float>::quiet_NaN())
      .def("seed_offline", &ReplayBuffer::seed_offline, py::arg("dataset"))
      .def("sample_indices", &ReplayBuffer::sample_indices, py::arg("batch_size"))
      .def("downsample", &ReplayBuffer::downsample, py::arg("keep_fraction"), py::arg("mode"))
      .def("__len__", &ReplayBuffer::size)
      .def("offline_count", &ReplayBuffer::offline_count)
      .def("transition_at",
           [](const ReplayBuffer& b, std::size_t i) { return b[i].transition; })
      .def("origin_at", [](const ReplayBuffer& b, std::size_t i) { return b[i].origin; });

  py::enum_<TargetMode>(m, "TargetMode")
      .value("expert_reference", TargetMode::expert_reference)
      .value("rmax_times_T", TargetMode::rmax_times_T);

  py::class_<AlphaSettings>(m, "AlphaSettings")
      .def(py::init<>())
      .def_readwrite("alpha_offline", &AlphaSettings::alpha_offline)
      .def_readwrite("kp", &AlphaSettings::kp)
      .def_readwrite("kd", &AlphaSettings::kd)
      .def_readwrite("r_target", &AlphaSettings::r_target)
      .def_readwrite("ema_beta", &AlphaSettings::ema_beta);

  py::class_<AlphaController>(m, "AlphaController")
      .def(py::init<AlphaSettings, double>(), py::arg("settings"), py::arg("initial_alpha"))
      .def("adapt", &AlphaController::adapt, py::arg("r_current_normalized"))
      .def_property_readonly("alpha", &AlphaController::alpha)
      .def_property_readonly("r_avg", &AlphaController::r_avg)
      .def_property_readonly("last_delta", &AlphaController::last_delta)
      .def_property_readonly("has_observation", &AlphaController::has_observation);
  m.def("resolve_target", &resolve_target, py::arg("mode"), py::arg("refs"),
        py::arg("expert_reference_value") = 1.05);

  py::class_<DenseNet<double>>(m, "DenseNet")
      .def(py::init([](int in, int h1, int h2, int out, const std::string& activation,
                       const VectorXd& low, const VectorXd& high, std::uint64_t seed) {
             const OutputActivation act = activation == "scaled_tanh" ? OutputActivation::scaled_tanh
                                                                      : OutputActivation::linear;
             return DenseNet<double>(in, h1, h2, out, act, low, high, seed);
           }),
           py::arg("input_dim"), py::arg("hidden1"), py::arg("hidden2"), py::arg("output_dim"),
           py::arg("activation") = "linear", py::arg("out_low") = VectorXd(),
           py::arg("out_high") = VectorXd(), py::arg("seed") = 0)
      .def("forward", [](const DenseNet<double>& net, const MatrixXd& x) { return net.forward(x); },
           py::arg("inputs"))
      .def("param_count", &DenseNet<double>::param_count);

  py::class_<EvalStats>(m, "EvalStats")
      .def_readonly("mean", &EvalStats::mean)
      .def_readonly("stddev", &EvalStats::stddev)
      .def_readonly("returns", &EvalStats::returns);

  m.def("evaluate_checkpoint",
        [](const std::string& checkpoint_path, int episodes, std::uint64_t seed) {
          AgentCheckpoint<float> ckpt = load_agent_file<float>(checkpoint_path);
          return evaluate_policy(ckpt.agent.actor(), ckpt.agent.env(), episodes, seed);
        },
        py::arg("checkpoint_path"), py::arg("episodes"), py::arg("seed"));

  m.def("run_cli", &run_cli, py::arg("args"),
        "Invoke the command-line interface (gen-data / pretrain / finetune / evaluate / sweep); "
        "returns the exit code");
}
