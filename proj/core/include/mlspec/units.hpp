#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "mlspec/ir.hpp"
#include "mlspec/typing.hpp"

namespace mlspec::units {

inline constexpr std::string_view kFormatVersion = "mlspec-unit-1";

/// Inlining metadata for one top-level binding. `size` is measured on the
/// lowered (pre-optimization) body.
struct BindingMeta {
  std::size_t size = 0;
  bool recursive = false;

  friend bool operator==(const BindingMeta&, const BindingMeta&) = default;
};

/// Interface and implementation of one compiled unit.
struct UnitArtifact {
  std::string format_version{kFormatVersion};
  std::string unit_name;
  typing::SchemeMap interface;
  ir::IrUnit impl;                    // optimized, stored after adjustment
  std::optional<ir::IrUnit> lowered;  // pre-optimization IR, for dump-ir
  std::map<std::string, BindingMeta> meta;
  std::vector<std::string> deps;      // units whose top level must run first

  const BindingMeta* find_meta(const std::string& name) const;
};

/// Import-time renaming of artifact TyVarIds into the importing session.
struct RenamingTable {
  struct Entry {
    std::map<TyVarId, TyVarId> renaming;
    typing::SchemeMap schemes;
  };
  std::map<std::string, Entry> units;

  /// Renaming recorded for `unit`, or null if it was never imported.
  const std::map<TyVarId, TyVarId>* renaming_for(const std::string& unit) const;
};

/// Checks the declared interface against the inferred schemes, adjusts the
/// implementation's kind tvars to the interface ids and packages everything.
/// `lowered` (when given) is adjusted the same way and used for metadata.
UnitArtifact emit_artifact(const std::optional<typing::SchemeMap>& iface, const typing::SchemeMap& inferred,
                           const ir::IrUnit& impl, const ir::IrUnit* lowered = nullptr,
                           std::vector<std::string> deps = {});

/// Rewrites each exported binding so that kind tvars standing for quantified
/// variables of the inferred scheme use the interface scheme's ids. Handles
/// interfaces more specific than the implementation by substituting the
/// corresponding kind. Specialized maps keyed on the unit's own exports are
/// re-keyed to match.
ir::IrUnit adjust_impl_tvars(const ir::IrUnit& impl, const typing::SchemeMap& inferred,
                             const typing::SchemeMap& iface);

/// Returns the artifact's interface with every TyVarId replaced by a fresh
/// session id. Idempotent per unit name.
typing::SchemeMap import_interface(const UnitArtifact& artifact, RenamingTable& table);

/// Stored body of `name`, with the unit's import renaming applied. Keys of
/// Specialized maps on another unit's functions are translated with that
/// unit's renaming, so they line up with bodies fetched from it.
ir::TermPtr fetch_body_for_inlining(const UnitArtifact& artifact, const std::string& name,
                                    const RenamingTable& table);

/// Before storing: Specialized keys on other units' functions are mapped back
/// from session ids to the ids of those units' artifacts.
ir::IrUnit externalize_foreign_keys(const ir::IrUnit& u, const RenamingTable& table);

std::string write_artifact(const UnitArtifact& a);
UnitArtifact read_artifact(std::string_view text);

void save_artifact(const UnitArtifact& a, const std::filesystem::path& path);
UnitArtifact load_artifact(const std::filesystem::path& path);

bool structurally_equal(const UnitArtifact& a, const UnitArtifact& b);

}  // namespace mlspec::units
