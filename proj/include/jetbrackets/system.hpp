#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "jetbrackets/expr.hpp"

namespace jb {

// Parameter constraint declared in a system header, e.g. "p != 1".
struct ParamConstraint {
  std::string param;
  Rational value;  // the excluded value
};

// A PDE system G^A = 0 over declared symbols. Aliases let an augmented
// (potential) system accept expressions written in the original variables:
// an alias maps a name to a jet coordinate (u -> U[x]) and is expanded at
// parse time.
struct PDESystem {
  std::string name;
  std::vector<std::string> independents;
  std::vector<std::string> dependents;
  std::vector<std::string> parameters;
  std::vector<ParamConstraint> constraints;
  std::map<std::string, JetCoordinate> aliases;

  std::vector<std::string> equationNames;
  ExprVec equations;

  struct Evolution {
    std::string timeVar;
    ExprVec rhs;  // indexed like dependents: u^alpha_t = rhs[alpha]
  };
  std::optional<Evolution> evolution;

  int equationCount() const { return static_cast<int>(equations.size()); }
  int dependentCount() const { return static_cast<int>(dependents.size()); }
  bool is_evolution() const { return evolution.has_value(); }

  int dependent_index(const std::string& dep) const;
  int independent_index(const std::string& x) const;
  bool is_parameter(const std::string& s) const;
};

}  // namespace jb
