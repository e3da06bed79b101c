#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <variant>

#include "chicle/runtime.hpp"

namespace chicle::cli {

enum class Subcommand { train, worker, sim };

struct Invocation {
  Subcommand subcommand = Subcommand::sim;
  RunConfig run;
  std::string data_path;
  std::optional<std::uint64_t> features;
  std::string metrics_out;
  std::string listen;  // driver: control port; worker: data port
  std::string driver;  // worker only
  bool local_workers = false;
};

struct UsageError {
  std::string message;
  bool help = false;  // --help was requested; message holds the usage text
};

// Exit codes.
inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitFailure = 3;

// Pure: touches neither files nor the network. `args` excludes the program name.
std::variant<Invocation, UsageError> parse_args(std::span<const std::string> args);

// Runs a parsed invocation; progress and the summary go to `log`.
// Throws chicle::Error (and std::exception) on runtime failure.
RunResult execute(const Invocation& inv, std::ostream& log);

// parse_args + execute with exit-code mapping.
int main(int argc, char** argv);

}  // namespace chicle::cli
