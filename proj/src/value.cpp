#include "qx/value.hpp"

#include <bit>

#include "qx/eval.hpp"
#include "qx/syntax.hpp"

namespace qx {

namespace {

// Deferred release queue. Destructors of environment frames and list cells
// hand their sole-owned children to this per-thread queue instead of
// releasing them recursively; the outermost destructor drains it in a loop.
struct Graveyard {
  std::vector<std::shared_ptr<const void>> pending;
  bool draining = false;
};

thread_local Graveyard graveyard;

void bury(std::shared_ptr<const void> p) {
  if (p && p.use_count() == 1) graveyard.pending.push_back(std::move(p));
}

void bury_children(Value& v) {
  if (auto* l = std::get_if<ListRef>(&v.v)) {
    bury(std::move(*l));
  } else if (auto* c = std::get_if<Closure>(&v.v)) {
    bury(std::move(c->env));
  } else if (auto* b = std::get_if<BuiltinRef>(&v.v)) {
    bury(std::move(b->applied));
  }
}

void drain() {
  if (graveyard.draining) return;
  graveyard.draining = true;
  while (!graveyard.pending.empty()) {
    auto p = std::move(graveyard.pending.back());
    graveyard.pending.pop_back();
    p.reset();
  }
  graveyard.draining = false;
}

const ListRef& empty_list() {
  static const ListRef empty = std::make_shared<const ListData>(std::vector<Value>{});
  return empty;
}

}  // namespace

ListData::~ListData() {
  for (auto& item : items) bury_children(item);
  drain();
}

EnvFrame::~EnvFrame() {
  bury_children(value);
  bury(std::move(parent));
  drain();
}

Value make_list(std::vector<Value> items) {
  if (items.empty()) return Value(empty_list());
  return Value(ListRef(std::make_shared<const ListData>(std::move(items))));
}

const std::vector<Value>& list_items(const ListRef& l) { return l->items; }

bool operator==(const Value& a, const Value& b) {
  if (a.v.index() != b.v.index()) return false;
  if (auto* x = a.get_if<std::int64_t>()) return *x == *b.get_if<std::int64_t>();
  if (auto* x = a.get_if<double>()) {
    return std::bit_cast<std::uint64_t>(*x) == std::bit_cast<std::uint64_t>(*b.get_if<double>());
  }
  if (auto* x = a.get_if<bool>()) return *x == *b.get_if<bool>();
  if (auto* x = a.get_if<std::string>()) return *x == *b.get_if<std::string>();
  if (a.get_if<Unit>()) return true;
  if (auto* x = a.get_if<ListRef>()) {
    const auto& xs = (*x)->items;
    const auto& ys = (*b.get_if<ListRef>())->items;
    if (xs.size() != ys.size()) return false;
    for (std::size_t i = 0; i < xs.size(); ++i) {
      if (!(xs[i] == ys[i])) return false;
    }
    return true;
  }
  if (auto* x = a.get_if<Closure>()) {
    const auto* y = b.get_if<Closure>();
    return x->lambda.get() == y->lambda.get() && x->env == y->env;
  }
  const auto* x = a.get_if<BuiltinRef>();
  const auto* y = b.get_if<BuiltinRef>();
  return x->fn == y->fn && x->applied == y->applied;
}

std::string describe(const Value& v) {
  if (auto* x = v.get_if<std::int64_t>()) return std::to_string(*x);
  if (auto* x = v.get_if<double>()) return format_float(*x);
  if (auto* x = v.get_if<bool>()) return *x ? "true" : "false";
  if (auto* x = v.get_if<std::string>()) return quote_string(*x);
  if (v.get_if<Unit>()) return "()";
  if (auto* x = v.get_if<ListRef>()) {
    std::string out = "[";
    bool first = true;
    for (const auto& item : (*x)->items) {
      if (!first) out += "; ";
      first = false;
      out += describe(item);
    }
    return out + "]";
  }
  if (auto* x = v.get_if<Closure>()) return "<closure " + x->lambda.as<Lam>()->param + ">";
  return "<builtin " + std::string(v.get_if<BuiltinRef>()->fn->name) + ">";
}

}  // namespace qx
