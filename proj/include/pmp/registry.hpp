#pragma once

#include <map>
#include <string>
#include <vector>

#include "pmp/problem.hpp"

namespace pmp {

using Params = std::map<std::string, double>;

/// Built-in problems with their named candidate controls.
struct RegistryInfo {
  std::string name;
  std::string summary;
  Params defaults;                     // accepted params and default values
  std::vector<std::string> controls;   // first entry is the reference candidate
};

const std::vector<RegistryInfo>& registry();

/// Throws Config naming the registry when `name` is unknown, or when a
/// param is not accepted by the problem.
const RegistryInfo& registry_info(const std::string& name);
ProblemSpec make_problem(const std::string& name, const Params& params = {});

/// Named candidate control of a registry problem (built for the same params).
PiecewiseControl make_control(const std::string& problem, const std::string& control,
                              const Params& params = {});

/// "a, b, c" listing used in error messages.
std::string registry_listing();

}  // namespace pmp
