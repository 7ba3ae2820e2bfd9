#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "polycarl/studies.hpp"
#include "polycarl/tiles.hpp"

namespace polycarl::detail {

inline FamilyConfig family_config(const ExperimentConfig& c) {
  FamilyConfig f;
  f.dim = *c.dim;
  f.degree = *c.degree;
  f.k_max = *c.k_max;
  f.bound_factor = c.bound_factor;
  f.step_factor = c.step_factor;
  return f;
}

// Per-trial seeds derived from the study seed.
inline std::uint64_t trial_seed(std::uint64_t seed, std::uint64_t trial) {
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (trial + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

inline std::string num(double x) { return format_number(x); }
inline std::string num(std::size_t x) { return std::to_string(x); }
inline std::string num(int x) { return std::to_string(x); }

StudyResult run_vdc(const ExperimentConfig& c);
StudyResult run_levelset(const ExperimentConfig& c);
StudyResult run_nets(const ExperimentConfig& c);
StudyResult run_decompose(const ExperimentConfig& c);
StudyResult run_interact(const ExperimentConfig& c);
StudyResult run_mass(const ExperimentConfig& c);
StudyResult run_stopping(const ExperimentConfig& c);
StudyResult run_trees(const ExperimentConfig& c);
StudyResult run_rows(const ExperimentConfig& c);

}  // namespace polycarl::detail
