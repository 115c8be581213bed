#pragma once

#include <cstddef>
#include <functional>
#include <limits>
#include <string>
#include <vector>

#include "mlspec/ir.hpp"
#include "mlspec/units.hpp"

namespace mlspec::opt {

struct InlinePolicy {
  /// Callees whose lowered body exceeds this many nodes are not inlined.
  std::size_t threshold = std::numeric_limits<std::size_t>::max();
  std::size_t max_rounds = 10;
};

/// Where cross-unit callee bodies come from.
struct InlineEnv {
  std::function<const units::UnitArtifact*(const std::string& unit)> artifact_for;
  units::RenamingTable* table = nullptr;
};

struct InlineSite {
  std::string caller;  // top-level binding containing the call
  std::string callee;  // "Unit.name", or the local name
  bool inlined = false;
  std::string reason;  // recursive | too-big | unknown-head | higher-order
};

struct InlineReport {
  std::vector<InlineSite> sites;
  std::string to_text() const;
};

/// Replaces applications of known non-recursive functions by kind-substituted,
/// alpha-renamed copies of their bodies. Iterates until nothing changes or
/// policy.max_rounds is reached.
ir::IrUnit inline_pass(const ir::IrUnit& u, const InlineEnv& env, const InlinePolicy& policy,
                       InlineReport* report = nullptr);

/// Propagates lets bound to variables, constants and specializations, and
/// drops dead lets whose bound expression is pure.
ir::IrUnit beta_cleanup(const ir::IrUnit& u);
ir::TermPtr beta_cleanup(const ir::TermPtr& t);

/// Baseline compiler: every TyVar kind becomes Generic, Specialized(v, k) becomes v.
ir::IrUnit erase_kinds(const ir::IrUnit& u);
ir::TermPtr erase_kinds(const ir::TermPtr& t);

}  // namespace mlspec::opt
