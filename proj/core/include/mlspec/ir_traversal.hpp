#pragma once

// Template definitions for ir.hpp; include that header instead.

#include <type_traits>

namespace mlspec::ir {

template <typename F>
void for_each_child(const Term& t, F&& f) {
  std::visit(
      [&](const auto& n) {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, Fun>) {
          f(n.body);
        } else if constexpr (std::is_same_v<T, App>) {
          f(n.fn);
          for (const TermPtr& a : n.args) f(a);
        } else if constexpr (std::is_same_v<T, Let>) {
          f(n.bound);
          f(n.body);
        } else if constexpr (std::is_same_v<T, If>) {
          f(n.cond);
          f(n.then_branch);
          f(n.else_branch);
        } else if constexpr (std::is_same_v<T, Prim> || std::is_same_v<T, Tuple>) {
          if constexpr (std::is_same_v<T, Prim>) {
            for (const TermPtr& a : n.args) f(a);
          } else {
            for (const TermPtr& a : n.elements) f(a);
          }
        } else if constexpr (std::is_same_v<T, ArrayGet>) {
          f(n.array);
          f(n.index);
        } else if constexpr (std::is_same_v<T, ArraySet>) {
          f(n.array);
          f(n.index);
          f(n.value);
        } else if constexpr (std::is_same_v<T, ArrayMake>) {
          f(n.length);
          f(n.init);
        } else if constexpr (std::is_same_v<T, ArrayLit>) {
          for (const TermPtr& a : n.elements) f(a);
        } else if constexpr (std::is_same_v<T, ArrayLen>) {
          f(n.array);
        } else if constexpr (std::is_same_v<T, TupleProj>) {
          f(n.tuple);
        } else if constexpr (std::is_same_v<T, Seq>) {
          f(n.first);
          f(n.second);
        } else if constexpr (std::is_same_v<T, Specialized>) {
          f(n.inner);
        }
      },
      t.node);
}

namespace detail {

template <typename F>
bool remap(TermPtr& slot, F& f) {
  TermPtr next = f(slot);
  if (next == slot) return false;
  slot = std::move(next);
  return true;
}

template <typename F>
bool remap(std::vector<TermPtr>& slots, F& f) {
  bool changed = false;
  for (TermPtr& s : slots) changed |= remap(s, f);
  return changed;
}

}  // namespace detail

template <typename F>
TermPtr map_children(const TermPtr& t, F&& f) {
  return std::visit(
      [&](const auto& n) -> TermPtr {
        using T = std::decay_t<decltype(n)>;
        T copy = n;
        bool changed = false;
        if constexpr (std::is_same_v<T, Fun>) {
          changed = detail::remap(copy.body, f);
        } else if constexpr (std::is_same_v<T, App>) {
          changed = detail::remap(copy.fn, f);
          changed |= detail::remap(copy.args, f);
        } else if constexpr (std::is_same_v<T, Let>) {
          changed = detail::remap(copy.bound, f);
          changed |= detail::remap(copy.body, f);
        } else if constexpr (std::is_same_v<T, If>) {
          changed = detail::remap(copy.cond, f);
          changed |= detail::remap(copy.then_branch, f);
          changed |= detail::remap(copy.else_branch, f);
        } else if constexpr (std::is_same_v<T, Prim>) {
          changed = detail::remap(copy.args, f);
        } else if constexpr (std::is_same_v<T, Tuple> || std::is_same_v<T, ArrayLit>) {
          changed = detail::remap(copy.elements, f);
        } else if constexpr (std::is_same_v<T, ArrayGet>) {
          changed = detail::remap(copy.array, f);
          changed |= detail::remap(copy.index, f);
        } else if constexpr (std::is_same_v<T, ArraySet>) {
          changed = detail::remap(copy.array, f);
          changed |= detail::remap(copy.index, f);
          changed |= detail::remap(copy.value, f);
        } else if constexpr (std::is_same_v<T, ArrayMake>) {
          changed = detail::remap(copy.length, f);
          changed |= detail::remap(copy.init, f);
        } else if constexpr (std::is_same_v<T, ArrayLen>) {
          changed = detail::remap(copy.array, f);
        } else if constexpr (std::is_same_v<T, TupleProj>) {
          changed = detail::remap(copy.tuple, f);
        } else if constexpr (std::is_same_v<T, Seq>) {
          changed = detail::remap(copy.first, f);
          changed |= detail::remap(copy.second, f);
        } else if constexpr (std::is_same_v<T, Specialized>) {
          changed = detail::remap(copy.inner, f);
        }
        return changed ? make(std::move(copy)) : t;
      },
      t->node);
}

}  // namespace mlspec::ir
