#pragma once

#include <cstddef>

#include "mlspec/ir.hpp"
#include "mlspec/typing.hpp"

namespace mlspec::lowering {

/// Translates a typed unit to IR. Array primitives carry the kind of their
/// element type; each occurrence of a polymorphic let-bound name is wrapped in
/// a Specialized node holding the instantiation recovered by one-directional
/// matching against the binding's scheme.
ir::IrUnit lower_unit(const typing::TypedUnit& tu);

struct GenericCount {
  std::size_t total = 0;
  std::size_t generic = 0;

  friend bool operator==(const GenericCount&, const GenericCount&) = default;
};

/// Static count of ArrayGet/ArraySet nodes; generic = TyVar or Generic kind.
GenericCount static_generic_count(const ir::IrUnit& u);
GenericCount static_generic_count(const ir::TermPtr& t);

}  // namespace mlspec::lowering
