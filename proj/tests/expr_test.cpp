#include <gtest/gtest.h>

#include <cmath>
#include <limits>

#include "qx/expr.hpp"
#include "qx/syntax.hpp"
#include "support/gen.hpp"

namespace qx {
namespace {

Expr P(std::string_view text) { return parse_expr(text); }

TEST(Ident, AcceptsPrimesAndUnderscores) {
  EXPECT_TRUE(is_valid_ident("x"));
  EXPECT_TRUE(is_valid_ident("_"));
  EXPECT_TRUE(is_valid_ident("x'"));
  EXPECT_TRUE(is_valid_ident("x'2"));
  EXPECT_TRUE(is_valid_ident("camelCase9"));
}

TEST(Ident, RejectsMalformedAndReserved) {
  EXPECT_FALSE(is_valid_ident(""));
  EXPECT_FALSE(is_valid_ident("9x"));
  EXPECT_FALSE(is_valid_ident("'x"));
  EXPECT_FALSE(is_valid_ident("a-b"));
  EXPECT_FALSE(is_valid_ident("é"));
  for (const char* word : {"int", "float", "bool", "str", "unit", "var", "lam", "app", "let", "letrec", "if", "list",
                           "true", "false"}) {
    EXPECT_TRUE(is_reserved_word(word)) << word;
    EXPECT_FALSE(is_valid_ident(word)) << word;
  }
}

TEST(Construct, RejectsInvalidNodes) {
  EXPECT_THROW(var("lam"), std::invalid_argument);
  EXPECT_THROW(lam("1x", lit_unit()), std::invalid_argument);
  EXPECT_THROW(lit_float(std::numeric_limits<double>::infinity()), std::invalid_argument);
  EXPECT_THROW(lit_float(std::nan("")), std::invalid_argument);
  EXPECT_THROW(letrec_in("f", lit_int(1), var("f")), std::invalid_argument);
  EXPECT_THROW(lit_str("\xff"), std::invalid_argument);
}

TEST(Construct, CallIsCurried) {
  EXPECT_EQ(call("add", {lit_int(1), lit_int(2)}), app(app(var("add"), lit_int(1)), lit_int(2)));
  EXPECT_EQ(call(var("f"), {}), var("f"));
}

TEST(Equality, FloatsCompareByBits) {
  EXPECT_EQ(lit_float(0.1), lit_float(0.1));
  EXPECT_FALSE(lit_float(0.0) == lit_float(-0.0));
  EXPECT_FALSE(lit_int(1) == lit_float(1.0));
}

TEST(FreeVars, Examples) {
  EXPECT_EQ(free_vars(lam("x", call("add", {var("x"), var("y")}))), (std::set<Ident>{"add", "y"}));
  EXPECT_EQ(free_vars(var("z")), (std::set<Ident>{"z"}));
  EXPECT_EQ(free_vars(letrec_in("f", lam("x", app(var("f"), var("x"))), app(var("f"), lit_int(1)))),
            std::set<Ident>{});
}

TEST(FreeVars, LetBindsOnlyInBody) {
  EXPECT_EQ(free_vars(P("(let x (var x) (var x))")), (std::set<Ident>{"x"}));
  EXPECT_EQ(free_vars(P("(let x (int 1) (var x))")), std::set<Ident>{});
  EXPECT_EQ(free_vars(P("(list (var a) (if (var b) (var c) (lam c (var c))))")),
            (std::set<Ident>{"a", "b", "c"}));
}

TEST(Substitute, DirectReplacement) {
  EXPECT_EQ(substitute(P("(app (app (var add) (var x)) (int 1))"), "x", lit_int(5)),
            P("(app (app (var add) (int 5)) (int 1))"));
}

TEST(Substitute, RenamesCapturingBinder) {
  EXPECT_EQ(substitute(P("(lam x (var y))"), "y", var("x")), P("(lam x' (var x))"));
}

TEST(Substitute, BoundOccurrenceUntouched) {
  EXPECT_EQ(substitute(P("(lam x (var x))"), "x", lit_int(9)), P("(lam x (var x))"));
}

TEST(Substitute, NoRenameWithoutCapture) {
  // The binder x would capture nothing: y does not occur in the body.
  EXPECT_EQ(substitute(P("(lam x (var z))"), "y", var("x")), P("(lam x (var z))"));
  EXPECT_EQ(substitute(P("(lam x (var y))"), "y", var("w")), P("(lam x (var w))"));
}

TEST(Substitute, RenameSkipsTakenSuffixes) {
  // x' is free in the body and x'2 free in the replacement.
  Expr e = P("(lam x (app (var x') (var y)))");
  Expr r = P("(app (var x) (var x'2))");
  EXPECT_EQ(substitute(e, "y", r), P("(lam x'3 (app (var x') (app (var x) (var x'2))))"));
}

TEST(Substitute, RenamedBinderKeepsItsOccurrences) {
  Expr e = P("(lam x (app (var x) (var y)))");
  EXPECT_EQ(substitute(e, "y", var("x")), P("(lam x' (app (var x') (var x)))"));
}

TEST(Substitute, LetShadowing) {
  EXPECT_EQ(substitute(P("(let x (var x) (var x))"), "x", lit_int(1)), P("(let x (int 1) (var x))"));
  EXPECT_EQ(substitute(P("(let a (int 0) (app (var a) (var y)))"), "y", var("a")),
            P("(let a' (int 0) (app (var a') (var a)))"));
}

TEST(Substitute, LetRecRenamesAcrossBoundAndBody) {
  Expr e = P("(letrec f (lam n (app (var f) (var g))) (app (var f) (var g)))");
  EXPECT_EQ(substitute(e, "g", var("f")),
            P("(letrec f' (lam n (app (var f') (var f))) (app (var f') (var f)))"));
}

TEST(Lift, Scalars) {
  EXPECT_EQ(lift(5), lit_int(5));
  EXPECT_EQ(lift(2.5), lit_float(2.5));
  EXPECT_EQ(lift(true), lit_bool(true));
  EXPECT_EQ(lift("hi"), lit_str("hi"));
  EXPECT_EQ(lift(Unit{}), lit_unit());
}

TEST(Lift, ListFromHost) {
  EXPECT_EQ(print_expr(lift(HostList{1, 2, 3, 4})), "(list (int 1) (int 2) (int 3) (int 4))");
  EXPECT_EQ(lift(HostList{HostList{}, HostList{"a"}}), P("(list (list) (list (str \"a\")))"));
}

TEST(Lift, RejectsFunctionsAndNonFinite) {
  HostFunction f = [](const HostValue& v) { return v; };
  EXPECT_THROW(lift(f), UnliftableValue);
  EXPECT_THROW(lift(HostList{1, f}), UnliftableValue);
  EXPECT_THROW(lift(std::numeric_limits<double>::quiet_NaN()), UnliftableValue);
  EXPECT_THROW(lift(std::string("\xc0\x80")), UnliftableValue);
}

TEST(IsLiteral, OnlyDataForms) {
  EXPECT_TRUE(is_literal(P("(list (int 1) (list unit (str \"\")))")));
  EXPECT_FALSE(is_literal(P("(list (var x))")));
  EXPECT_FALSE(is_literal(P("(lam x (int 1))")));
}

class ExprProperty : public ::testing::TestWithParam<int> {};

TEST_P(ExprProperty, SubstituteWithoutFreeOccurrenceIsIdentity) {
  gen::Rng rng(static_cast<std::uint64_t>(GetParam()));
  for (int i = 0; i < 200; ++i) {
    Expr e = gen::any_expr(rng, 6);
    Expr r = gen::any_expr(rng, 3);
    Ident x = "absent";
    ASSERT_EQ(substitute(e, x, r), e);
    for (const Ident& bound : {Ident("x"), Ident("f"), Ident("acc")}) {
      if (!free_vars(e).contains(bound)) {
        ASSERT_EQ(substitute(e, bound, r), e);
      }
    }
  }
}

TEST_P(ExprProperty, FreeVarsAfterSubstitution) {
  gen::Rng rng(static_cast<std::uint64_t>(GetParam()) + 1000);
  int checked = 0;
  for (int i = 0; i < 400; ++i) {
    Expr e = gen::any_expr(rng, 6);
    Expr r = gen::any_expr(rng, 3);
    auto fv = free_vars(e);
    if (fv.empty()) continue;
    Ident x = *std::next(fv.begin(), gen::uniform(rng, 0, static_cast<std::int64_t>(fv.size()) - 1));
    std::set<Ident> expected = fv;
    expected.erase(x);
    auto fr = free_vars(r);
    expected.insert(fr.begin(), fr.end());
    ASSERT_EQ(free_vars(substitute(e, x, r)), expected) << print_expr(e) << " [" << x << " := " << print_expr(r) << "]";
    ++checked;
  }
  EXPECT_GT(checked, 100);
}

TEST_P(ExprProperty, SubstitutionIsDeterministic) {
  gen::Rng rng(static_cast<std::uint64_t>(GetParam()) + 2000);
  for (int i = 0; i < 100; ++i) {
    Expr e = gen::any_expr(rng, 6);
    Expr r = gen::any_expr(rng, 3);
    Ident x = gen::any_ident(rng);
    ASSERT_EQ(print_expr(substitute(e, x, r)), print_expr(substitute(e, x, r)));
  }
}

INSTANTIATE_TEST_SUITE_P(Seeds, ExprProperty, ::testing::Values(1, 2, 3));

}  // namespace
}  // namespace qx
