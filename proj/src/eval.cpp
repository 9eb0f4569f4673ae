#include "qx/eval.hpp"

#include <array>
#include <cmath>

#include "qx/syntax.hpp"

namespace qx {

namespace {

constexpr std::array<std::string_view, 10> kCodeNames = {
    "unbound-var",      "type-error",  "div-zero",         "fuel-exhausted", "arity-error",
    "empty-list",       "unliftable-result", "parse-error", "version-mismatch", "overloaded"};

// Continuation frames. Node pointers refer into the expression being
// evaluated, which the caller keeps alive for the duration of the run.
struct EvalArg {
  const Expr* arg;
  Env env;
};
struct CallWith {
  Value fn;
};
struct ApplyTo {
  Value arg;
};
struct LetBody {
  const Let* node;
  Env env;
};
struct IfBranch {
  const If* node;
  Env env;
};
struct ListItems {
  const ListLit* node;
  Env env;
  std::vector<Value> done;
};
struct MapStep {
  Value fn;
  ListRef src;
  std::size_t index;
  std::vector<Value> out;
};
struct FilterStep {
  Value fn;
  ListRef src;
  std::size_t index;
  std::vector<Value> out;
};
struct FoldStep {
  Value fn;
  ListRef src;
  std::size_t next;
};

using Frame = std::variant<EvalArg, CallWith, ApplyTo, LetBody, IfBranch, ListItems, MapStep, FilterStep, FoldStep>;

[[noreturn]] void fail(ErrorCode code, std::string detail) { throw EvalFailure(code, std::move(detail)); }

const ListRef& function_list_arg(std::string_view fn, const Value& f, const Value& l) {
  if (!f.is_function()) fail(ErrorCode::type_error, std::string(fn) + ": first argument must be a function");
  const auto* list = l.get_if<ListRef>();
  if (!list) fail(ErrorCode::type_error, std::string(fn) + ": expected list");
  return *list;
}

class Machine {
 public:
  explicit Machine(std::uint64_t fuel) : fuel_(fuel), budget_(fuel) {}

  std::uint64_t used() const { return budget_ - fuel_; }

  Value run(const Expr& root) {
    control_ = &root;
    env_ = nullptr;
    evaluating_ = true;
    for (;;) {
      if (evaluating_) {
        step();
      } else if (stack_.empty()) {
        return std::move(value_);
      } else {
        resume();
      }
    }
  }

 private:
  void step() {
    if (fuel_ == 0) fail(ErrorCode::fuel_exhausted, "evaluation step budget exhausted");
    --fuel_;
    const auto& node = control_->node().v;
    switch (node.index()) {
      case 0: return ret(std::get<LitInt>(node).value);
      case 1: return ret(std::get<LitFloat>(node).value);
      case 2: return ret(std::get<LitBool>(node).value);
      case 3: return ret(std::get<LitStr>(node).value);
      case 4: return ret(Unit{});
      case 5: return ret(lookup(std::get<Var>(node).name));
      case 6: return ret(Closure{*control_, env_});
      case 7: {
        const auto& n = std::get<App>(node);
        stack_.emplace_back(EvalArg{&n.arg, env_});
        control_ = &n.fn;
        return;
      }
      case 8: {
        const auto& n = std::get<Let>(node);
        stack_.emplace_back(LetBody{&n, env_});
        control_ = &n.bound;
        return;
      }
      case 9: {
        const auto& n = std::get<LetRec>(node);
        env_ = std::make_shared<const EnvFrame>(n.name, Value(Closure{n.bound, nullptr}), env_, true);
        control_ = &n.body;
        return;
      }
      case 10: {
        const auto& n = std::get<If>(node);
        stack_.emplace_back(IfBranch{&n, env_});
        control_ = &n.cond;
        return;
      }
      case 11: {
        const auto& n = std::get<ListLit>(node);
        if (n.items.empty()) return ret(make_list({}));
        std::vector<Value> done;
        done.reserve(n.items.size());
        stack_.emplace_back(ListItems{&n, env_, std::move(done)});
        control_ = &n.items[0];
        return;
      }
    }
  }

  void resume() {
    Frame frame = std::move(stack_.back());
    stack_.pop_back();
    switch (frame.index()) {
      case 0: {
        auto& f = std::get<EvalArg>(frame);
        stack_.emplace_back(CallWith{std::move(value_)});
        eval(f.arg, std::move(f.env));
        return;
      }
      case 1: return apply(std::get<CallWith>(frame).fn, std::move(value_));
      case 2: {
        Value fn = std::move(value_);
        return apply(fn, std::move(std::get<ApplyTo>(frame).arg));
      }
      case 3: {
        auto& f = std::get<LetBody>(frame);
        Env env = std::make_shared<const EnvFrame>(f.node->name, std::move(value_), std::move(f.env));
        eval(&f.node->body, std::move(env));
        return;
      }
      case 4: {
        auto& f = std::get<IfBranch>(frame);
        const bool* cond = value_.get_if<bool>();
        if (!cond) fail(ErrorCode::type_error, "if: condition is not a bool");
        eval(*cond ? &f.node->then_branch : &f.node->else_branch, std::move(f.env));
        return;
      }
      case 5: {
        auto& f = std::get<ListItems>(frame);
        f.done.push_back(std::move(value_));
        if (f.done.size() == f.node->items.size()) return ret(make_list(std::move(f.done)));
        const Expr* next = &f.node->items[f.done.size()];
        Env env = f.env;
        stack_.emplace_back(std::move(frame));
        eval(next, std::move(env));
        return;
      }
      case 6: {
        auto& f = std::get<MapStep>(frame);
        f.out.push_back(std::move(value_));
        const auto& items = f.src->items;
        if (++f.index == items.size()) return ret(make_list(std::move(f.out)));
        Value fn = f.fn;
        Value arg = items[f.index];
        stack_.emplace_back(std::move(frame));
        return apply(fn, std::move(arg));
      }
      case 7: {
        auto& f = std::get<FilterStep>(frame);
        const bool* keep = value_.get_if<bool>();
        if (!keep) fail(ErrorCode::type_error, "filter: predicate did not return a bool");
        const auto& items = f.src->items;
        if (*keep) f.out.push_back(items[f.index]);
        if (++f.index == items.size()) return ret(make_list(std::move(f.out)));
        Value fn = f.fn;
        Value arg = items[f.index];
        stack_.emplace_back(std::move(frame));
        return apply(fn, std::move(arg));
      }
      case 8: {
        auto& f = std::get<FoldStep>(frame);
        const auto& items = f.src->items;
        if (f.next == items.size()) return;  // value_ already holds the accumulator
        Value fn = f.fn;
        Value x = items[f.next++];
        stack_.emplace_back(std::move(frame));
        stack_.emplace_back(ApplyTo{std::move(x)});
        return apply(fn, std::move(value_));
      }
    }
  }

  void apply(const Value& fn, Value arg) {
    if (const auto* c = fn.get_if<Closure>()) {
      const auto& lambda = *c->lambda.as<Lam>();
      eval(&lambda.body, std::make_shared<const EnvFrame>(lambda.param, std::move(arg), c->env));
      return;
    }
    const auto* b = fn.get_if<BuiltinRef>();
    if (!b) fail(ErrorCode::arity_error, "cannot apply a non-function value");

    std::array<Value, 3> args;
    std::size_t n = 0;
    if (b->applied) {
      for (const auto& a : b->applied->items) args[n++] = a;
    }
    args[n++] = std::move(arg);
    const Builtin& def = *b->fn;
    if (static_cast<int>(n) < def.arity) {
      return ret(BuiltinRef{&def, std::make_shared<const ListData>(std::vector<Value>(args.begin(), args.begin() + n))});
    }

    switch (def.kind) {
      case BuiltinKind::plain:
        return ret(def.apply(std::span<const Value>(args.data(), n), fuel_));
      case BuiltinKind::map: {
        const ListRef& src = function_list_arg("map", args[0], args[1]);
        if (src->items.empty()) return ret(make_list({}));
        std::vector<Value> out;
        out.reserve(src->items.size());
        Value first = src->items[0];
        stack_.emplace_back(MapStep{args[0], src, 0, std::move(out)});
        return apply(args[0], std::move(first));
      }
      case BuiltinKind::filter: {
        const ListRef& src = function_list_arg("filter", args[0], args[1]);
        if (src->items.empty()) return ret(make_list({}));
        Value first = src->items[0];
        stack_.emplace_back(FilterStep{args[0], src, 0, {}});
        return apply(args[0], std::move(first));
      }
      case BuiltinKind::foldl: {
        const ListRef& src = function_list_arg("foldl", args[0], args[2]);
        if (src->items.empty()) return ret(std::move(args[1]));
        Value first = src->items[0];
        stack_.emplace_back(FoldStep{args[0], src, 1});
        stack_.emplace_back(ApplyTo{std::move(first)});
        return apply(args[0], std::move(args[1]));
      }
    }
  }

  Value lookup(const Ident& name) const {
    for (const Env* e = &env_; *e; e = &(*e)->parent) {
      const EnvFrame& frame = **e;
      if (frame.name != name) continue;
      if (frame.self_ref) return Closure{frame.value.get_if<Closure>()->lambda, *e};
      return frame.value;
    }
    if (const Builtin* b = find_builtin(name)) return BuiltinRef{b, nullptr};
    fail(ErrorCode::unbound_var, "unbound variable '" + name + "'");
  }

  void eval(const Expr* e, Env env) {
    control_ = e;
    env_ = std::move(env);
    evaluating_ = true;
  }

  void ret(Value v) {
    value_ = std::move(v);
    evaluating_ = false;
  }

  std::uint64_t fuel_;
  std::uint64_t budget_;
  std::vector<Frame> stack_;
  const Expr* control_ = nullptr;
  Env env_;
  Value value_;
  bool evaluating_ = true;
};

std::variant<Expr, EvalError> to_expr(const Value& v, std::size_t depth) {
  auto unliftable = [](std::string detail) { return EvalError{ErrorCode::unliftable_result, std::move(detail)}; };
  if (auto* x = v.get_if<std::int64_t>()) return lit_int(*x);
  if (auto* x = v.get_if<double>()) {
    if (!std::isfinite(*x)) return unliftable("non-finite float result");
    return lit_float(*x);
  }
  if (auto* x = v.get_if<bool>()) return lit_bool(*x);
  if (auto* x = v.get_if<std::string>()) return lit_str(*x);
  if (v.get_if<Unit>()) return lit_unit();
  if (auto* x = v.get_if<ListRef>()) {
    if (depth + 1 >= kMaxNesting - 8) return unliftable("list nested too deeply");
    std::vector<Expr> items;
    items.reserve((*x)->items.size());
    for (const auto& item : (*x)->items) {
      auto r = to_expr(item, depth + 1);
      if (auto* err = std::get_if<EvalError>(&r)) return std::move(*err);
      items.push_back(std::move(std::get<Expr>(r)));
    }
    return list_of(std::move(items));
  }
  return unliftable("function values cannot be returned as data");
}

}  // namespace

std::string_view to_string(ErrorCode code) { return kCodeNames[static_cast<std::size_t>(code)]; }

std::optional<ErrorCode> error_code_from_string(std::string_view token) {
  for (std::size_t i = 0; i < kCodeNames.size(); ++i) {
    if (kCodeNames[i] == token) return static_cast<ErrorCode>(i);
  }
  return std::nullopt;
}

bool is_eval_error_code(ErrorCode code) { return code <= ErrorCode::unliftable_result; }

EvalFailure::EvalFailure(ErrorCode code, const std::string& detail)
    : std::runtime_error(std::string(to_string(code)) + ": " + detail), error{code, detail} {}

Fuel::Fuel(std::uint64_t budget) : budget_(budget) {
  if (budget == 0) throw std::invalid_argument("fuel budget must be positive");
}

const Value& EvalResult::value() const {
  if (!ok()) throw std::logic_error("EvalResult holds an error: " + std::get<EvalError>(r_).detail);
  return std::get<Value>(r_);
}

const EvalError& EvalResult::error() const {
  if (ok()) throw std::logic_error("EvalResult holds a value");
  return std::get<EvalError>(r_);
}

EvalResult evaluate(const Expr& e, Fuel fuel) {
  Machine m(fuel.budget());
  try {
    EvalResult r(m.run(e));
    r.steps = m.used();
    return r;
  } catch (const EvalFailure& f) {
    EvalResult r(f.error);
    r.steps = m.used();
    return r;
  }
}

std::variant<Expr, EvalError> value_to_expr(const Value& v) { return to_expr(v, 0); }

Value literal_to_value(const Expr& e) {
  const auto& node = e.node().v;
  if (auto* n = std::get_if<LitInt>(&node)) return n->value;
  if (auto* n = std::get_if<LitFloat>(&node)) return n->value;
  if (auto* n = std::get_if<LitBool>(&node)) return n->value;
  if (auto* n = std::get_if<LitStr>(&node)) return n->value;
  if (std::holds_alternative<LitUnit>(node)) return Unit{};
  if (auto* n = std::get_if<ListLit>(&node)) {
    std::vector<Value> items;
    items.reserve(n->items.size());
    for (const auto& item : n->items) items.push_back(literal_to_value(item));
    return make_list(std::move(items));
  }
  throw std::invalid_argument("not a literal expression: " + print_expr(e));
}

std::variant<Expr, EvalError> evaluate_to_literal(const Expr& e, Fuel fuel) {
  EvalResult r = evaluate(e, fuel);
  if (!r) return r.error();
  return value_to_expr(r.value());
}

}  // namespace qx
