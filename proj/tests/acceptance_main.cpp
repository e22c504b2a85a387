// Acceptance suite: runs every verification criterion at its pinned tolerance
// and prints one pass/fail line per criterion. Exit code 0 iff all mandatory
// criteria pass.

#include <cstdint>
#include <cstdlib>
#include <iostream>
#include <string>

#include "seli/harness.hpp"

int main(int argc, char** argv) {
  std::uint64_t seed = 20177;
  bool verbose = false;
  for (int i = 1; i < argc; ++i) {
    const std::string arg = argv[i];
    if (arg == "--seed" && i + 1 < argc) {
      seed = std::strtoull(argv[++i], nullptr, 10);
    } else if (arg == "--verbose") {
      verbose = true;
    } else {
      std::cerr << "usage: " << argv[0] << " [--seed S] [--verbose]\n";
      return 1;
    }
  }

  seli::VerificationArtifacts artifacts =
      seli::run_verification(seed, verbose ? &std::cerr : nullptr);

  seli::print_verdict(artifacts.rows, std::cout);
  for (const std::string& note : artifacts.notes)
    std::cout << "[note] " << note << "\n";

  int mandatory_failures = 0;
  for (const seli::VerdictRow& row : artifacts.rows)
    if (row.mandatory && !row.pass) ++mandatory_failures;

  if (mandatory_failures > 0) {
    std::cout << mandatory_failures << " mandatory criteria failed\n";
    return 4;
  }
  std::cout << "all mandatory criteria passed\n";
  return 0;
}
