#pragma once

#include <cstdint>
#include <string>

#include "ihom/density.hpp"

namespace ihom {

enum class Objective { bulk, shear, npr_relaxed, npr_log };
enum class FilterPlacement { density, sensitivity };
enum class InitKind { constant, trig, file };
enum class Precision { mixed, all_double };

struct RunConfig {
  int reso = 64;
  double vol = 0.3;
  double youngs = 1e6;
  double poisson = 0.3;
  Objective obj = Objective::bulk;
  double beta = 0.8;    // npr-relaxed
  double eta = 0.6;     // npr-log
  double tau = -1e-3;   // npr-log
  double gamma = 0.5;   // npr-log
  double penal = 3.0;
  double filter_radius = 2.0;
  FilterPlacement filter_placement = FilterPlacement::density;
  FilterKernel kernel = FilterKernel::spline4;
  Symmetry sym = Symmetry::reflect6;
  InitKind init = InitKind::trig;
  std::string init_file;
  int basis_n = 2;
  std::uint64_t seed = 0;
  int max_iter = 300;
  double step = 0.05;
  double damp = 0.5;
  double tol = 1e-2;
  int max_cycles = 50;
  Precision precision = Precision::mixed;
  int workers = 0;  // 0: leave the runtime default
  std::string out_dir = "out";
};

// Parses command-line flags, optionally merged over a flat JSON config file
// given via --config; flags win. Unknown JSON keys and out-of-range values
// are rejected with a descriptive message.
RunConfig parse_config(int argc, const char* const* argv);

std::string config_to_json(const RunConfig& cfg);

std::string objective_name(Objective o);
std::string symmetry_name(Symmetry s);
std::string kernel_name(FilterKernel k);

}  // namespace ihom
