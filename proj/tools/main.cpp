#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "chameleon/cli.hpp"

int main(int argc, char** argv) {
  CLI::App app{"chameleon: token-quorum replication simulator"};
  app.require_subcommand(1);

  chameleon::cli::RunOptions run;
  std::string fanout;
  std::uint64_t seed = 0;
  auto* run_cmd = app.add_subcommand("run", "simulate a scenario and check its history");
  run_cmd->add_option("scenario", run.scenario_path, "scenario YAML file")->required()->check(CLI::ExistingFile);
  auto* seed_opt = run_cmd->add_option("--seed", seed, "override the scenario seed");
  run_cmd->add_option("--out", run.out_dir, "output directory")->capture_default_str();
  run_cmd->add_option("--fanout", fanout, "read fan-out")->check(CLI::IsMember({"closest", "broadcast"}));

  chameleon::cli::QuorumOptions quorums;
  auto* q_cmd = app.add_subcommand("quorums", "list minimal quorums of a configuration");
  q_cmd->add_option("--preset", quorums.preset, "leader, majority, flexible or local")->capture_default_str();
  q_cmd->add_option("--n", quorums.n, "cluster size")->capture_default_str();
  q_cmd->add_option("--leader", quorums.leader, "leader process")->capture_default_str();
  q_cmd->add_option("--transfer", quorums.transfers, "token transfer such as B.0=D (flexible only)");

  std::string history_path;
  auto* c_cmd = app.add_subcommand("check", "re-check a history file offline");
  c_cmd->add_option("history", history_path, "history JSONL file")->required();

  CLI11_PARSE(app, argc, argv);

  if (*run_cmd) {
    if (*seed_opt) run.seed = seed;
    if (fanout == "closest") run.fanout = chameleon::ReadFanout::closest;
    if (fanout == "broadcast") run.fanout = chameleon::ReadFanout::broadcast;
    return chameleon::cli::cmd_run(run, std::cout, std::cerr);
  }
  if (*q_cmd) return chameleon::cli::cmd_quorums(quorums, std::cout, std::cerr);
  return chameleon::cli::cmd_check(history_path, std::cout, std::cerr);
}
