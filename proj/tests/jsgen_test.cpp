#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "qx/eval.hpp"
#include "qx/jsgen.hpp"
#include "qx/sweep.hpp"
#include "qx/syntax.hpp"
#include "support/gen.hpp"
#include "support/js.hpp"
#include "support/js_fixtures.hpp"
#include "support/programs.hpp"

namespace qx {
namespace {

namespace fs = std::filesystem;
using jscheck::K;
using jscheck::NodeP;

std::string tr(std::string_view text) { return js::translate(parse_expr(text)); }

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

const std::set<std::string> kHostGlobals = {"Math", "Error"};

std::set<std::string> runtime_exports() { return jscheck::runtime_exports(js::preamble()); }

void check_module(const std::string& text) {
  auto problems = jscheck::module_problems(text, js::preamble());
  EXPECT_TRUE(problems.empty()) << problems.front() << "\n" << text;
}

// Checks a bare expression with `globals` in scope besides RT.
void check_expression(const std::string& text, std::set<std::string> globals) {
  NodeP e;
  ASSERT_NO_THROW(e = jscheck::parse_expression(text)) << text;
  globals.insert("RT");
  auto wrapper = std::make_shared<jscheck::Node>();
  wrapper->kind = K::program;
  wrapper->kids.push_back(e);
  auto missing = jscheck::ScopeChecker(globals).check(wrapper);
  EXPECT_TRUE(missing.empty()) << "unresolved " << *missing.begin() << " in " << text;
}

TEST(Translate, MappingTable) {
  EXPECT_EQ(tr("(if (bool true) (int 1) (int 2))"), "(true ? 1 : 2)");
  EXPECT_EQ(tr("(list)"), "{$: 0}");
  EXPECT_EQ(tr("(lam x (app (app (var add) (var x)) (int 1)))"), "function (x) { return RT.add(x)(1); }");
  EXPECT_EQ(tr("(int -3)"), "-3");
  EXPECT_EQ(tr("(float 2.0)"), "2.0");
  EXPECT_EQ(tr("(float 0.1)"), "0.1");
  EXPECT_EQ(tr("(bool false)"), "false");
  EXPECT_EQ(tr("(str \"a\\\"b\")"), "\"a\\\"b\"");
  EXPECT_EQ(tr("unit"), "null");
  EXPECT_EQ(tr("(let x (int 1) (var x))"), "(function (x) { return x; })(1)");
  EXPECT_EQ(tr("(letrec f (lam n (app (var f) (var n))) (var f))"),
            "(function () { var f = function (n) { return f(n); }; return f; })()");
  EXPECT_EQ(tr("(list (int 1) (int 2))"), "{$: 1, $0: 1, $1: {$: 1, $0: 2, $1: {$: 0}}}");
  EXPECT_EQ(tr("(app (lam x (var x)) (int 1))"), "(function (x) { return x; })(1)");
}

TEST(Translate, ConsSites) {
  EXPECT_EQ(tr("(app (app (var cons) (int 1)) (list))"), "{$: 1, $0: 1, $1: {$: 0}}");
  // Partial application keeps the curried runtime function.
  EXPECT_EQ(tr("(app (var cons) (int 1))"), "RT.cons(1)");
  EXPECT_EQ(tr("(var cons)"), "RT.cons");
  // A local cons is an ordinary call.
  EXPECT_EQ(tr("(lam cons (app (app (var cons) (int 1)) (int 2)))"), "function (cons) { return cons(1)(2); }");
  EXPECT_EQ(js::translate(parse_expr("(app (app (var cons) (int 1)) (int 2))"), {"cons"}), "cons(1)(2)");
}

TEST(Translate, BuiltinsAndShadowing) {
  EXPECT_EQ(tr("(var sum)"), "RT.sum");
  EXPECT_EQ(tr("(lam sum (var sum))"), "function (sum) { return sum; }");
  // Shadowing ends with the binder's scope.
  EXPECT_EQ(tr("(app (lam map (var map)) (var map))"), "(function (map) { return map; })(RT.map)");
  EXPECT_EQ(js::translate(parse_expr("(var map)"), {"map"}), "map");
}

TEST(Translate, Mangling) {
  EXPECT_EQ(js::mangle("x"), "x");
  EXPECT_EQ(js::mangle("x'"), "x$p");
  EXPECT_EQ(js::mangle("f''1"), "f$p$p1");
  EXPECT_EQ(js::mangle("class"), "class$");
  EXPECT_EQ(js::mangle("RT"), "RT$");
  EXPECT_EQ(js::mangle("eval"), "eval$");
  EXPECT_EQ(js::mangle("undefined"), "undefined$");
  EXPECT_EQ(js::mangle("Rt"), "Rt");
  EXPECT_THROW(js::mangle("lam"), js::JsError);
  EXPECT_THROW(js::mangle("a-b"), js::JsError);
}

TEST(Translate, Quoting) {
  EXPECT_EQ(js::quote(""), "\"\"");
  EXPECT_EQ(js::quote("a\\b\n\t\r\"c"), "\"a\\\\b\\n\\t\\r\\\"c\"");
  EXPECT_EQ(js::quote(std::string("\x01\x1f\x7f", 3)), "\"\\u0001\\u001f\\u007f\"");
  EXPECT_EQ(js::quote(std::string("\0", 1)), "\"\\u0000\"");
  EXPECT_EQ(js::quote("\xE2\x80\xA8|\xE2\x80\xA9"), "\"\\u2028|\\u2029\"");
  EXPECT_EQ(js::quote("λ€𝄞"), "\"λ€𝄞\"");
}

TEST(Translate, Numbers) {
  EXPECT_EQ(js::number(std::int64_t{42}), "42");
  EXPECT_EQ(js::number(1e300), "1e+300");
  EXPECT_EQ(js::number(-0.0), "-0.0");
  EXPECT_THROW(js::number(std::numeric_limits<double>::infinity()), js::JsError);
  EXPECT_THROW(js::number(std::nan("")), js::JsError);
}

TEST(Translate, UnboundNameIsAnError) {
  EXPECT_THROW(tr("(var nope)"), js::JsError);
  EXPECT_THROW(tr("(lam x (var y))"), js::JsError);
  // letrec binds its name in its own bound expression and in the body only.
  EXPECT_THROW(tr("(app (letrec f (lam n (var n)) (var f)) (var f))"), js::JsError);
  EXPECT_NO_THROW(js::translate(parse_expr("(var y)"), {"y"}));
}

TEST(Translate, IsDeterministic) {
  gen::Rng rng(61);
  for (int i = 0; i < 100; ++i) {
    Expr e = gen::any_expr(rng, 5);
    auto fv = free_vars(e);
    std::set<Ident> globals(fv.begin(), fv.end());
    std::string a = js::translate(e, globals);
    std::string b = js::translate(parse_expr(print_expr(e)), globals);
    EXPECT_EQ(a, b);
  }
}

TEST(Stub, Templates) {
  EXPECT_EQ(js::rpc_stub("getPrimes", 0), "var getPrimes = function () { return RT.rpc(\"getPrimes\", []); };");
  EXPECT_EQ(js::rpc_stub("f", 2),
            "var f = function (a0) { return function (a1) { return RT.rpc(\"f\", [a0, a1]); }; };");
  EXPECT_EQ(js::rpc_stub("g", 1), "var g = function (a0) { return RT.rpc(\"g\", [a0]); };");
  EXPECT_EQ(js::rpc_stub("x'", 1), "var x$p = function (a0) { return RT.rpc(\"x'\", [a0]); };");
  EXPECT_THROW(js::rpc_stub("f", -1), js::JsError);
}

TEST(Stub, WellFormedForManyArities) {
  for (int arity = 0; arity <= 12; ++arity) {
    js::Module m;
    m.add_stub("f", arity);
    check_module(m.emit());
  }
}

TEST(Stub, DuplicateNameIsAnError) {
  js::Module m;
  m.add_stub("getPrimes", 0);
  EXPECT_THROW(m.add_stub("getPrimes", 1), js::JsError);
  EXPECT_THROW(m.define("getPrimes", lit_int(1)), js::JsError);
  m.define("main", parse_expr("(lam u (app (var getPrimes) unit))"));
  EXPECT_THROW(m.add_stub("main", 0), js::JsError);
  EXPECT_EQ(m.stubs().size(), 1u);
  EXPECT_EQ(m.definitions().size(), 1u);
}

TEST(ModuleTest, DefinitionsSeePriorNamesOnly) {
  js::Module m;
  EXPECT_THROW(m.define("a", parse_expr("(var b)")), js::JsError);
  m.define("b", parse_expr("(int 1)"));
  m.define("a", parse_expr("(app (app (var add) (var b)) (int 1))"));
  EXPECT_EQ(m.emit_body(), "var b = 1;\nvar a = RT.add(b)(1);\n");
  EXPECT_EQ(m.emit(), js::preamble() + m.emit_body());
}

TEST(ModuleTest, EmitsDefinitionsBeforeStubs) {
  auto m = js::build_module("main", parse_expr("(lam u (app (var f) (var u)))"), {{"f", 1}});
  EXPECT_EQ(m.emit_body(),
            "var main = function (u) { return f(u); };\n"
            "var f = function (a0) { return RT.rpc(\"f\", [a0]); };\n");
}

TEST(ModuleTest, RpcList) {
  using L = std::vector<std::pair<Ident, int>>;
  EXPECT_EQ(js::parse_rpc_list(""), L{});
  EXPECT_EQ(js::parse_rpc_list("getPrimes:0"), (L{{"getPrimes", 0}}));
  EXPECT_EQ(js::parse_rpc_list("f:2,x':1"), (L{{"f", 2}, {"x'", 1}}));
  for (const char* bad : {"f", "f:", ":1", "f:-1", "f:1,", "f:x", "if:1", "f:1:2"}) {
    EXPECT_THROW(js::parse_rpc_list(bad), js::JsError) << bad;
  }
}

TEST(Preamble, WellFormedAndClosed) {
  auto prog = jscheck::parse_program(js::preamble());
  EXPECT_EQ(prog->kids.size(), 1u);
  auto missing = jscheck::ScopeChecker(kHostGlobals).check(prog);
  EXPECT_TRUE(missing.empty()) << *missing.begin();
  EXPECT_EQ(jscheck::ScopeChecker::top_level(prog), std::set<std::string>{"RT"});
}

TEST(Preamble, ExportsEveryBuiltinAndTheRpcHook) {
  std::set<std::string> expected = {"rpc"};
  for (const auto& b : builtin_table()) expected.insert(std::string(b.name));
  EXPECT_EQ(runtime_exports(), expected);
}

TEST(JsEncode, Examples) {
  EXPECT_EQ(js::encode_value(make_list({std::int64_t{1}, std::int64_t{2}})),
            "{$: 1, $0: 1, $1: {$: 1, $0: 2, $1: {$: 0}}}");
  EXPECT_EQ(js::encode_value(Unit{}), "null");
  EXPECT_EQ(js::encode_value(make_list({})), "{$: 0}");
  EXPECT_EQ(js::encode_value(true), "true");
  EXPECT_EQ(js::encode_value(2.5), "2.5");
  EXPECT_EQ(js::encode_value(std::string("hi")), "\"hi\"");
}

TEST(JsEncode, RejectsClosuresAndNonFinite) {
  auto r = evaluate(parse_expr("(lam x (var x))"));
  ASSERT_TRUE(r.ok());
  EXPECT_THROW(js::encode_value(r.value()), js::JsError);
  EXPECT_THROW(js::encode_value(std::numeric_limits<double>::infinity()), js::JsError);
  EXPECT_THROW(js::encode_value(make_list({std::nan("")})), js::JsError);
}

TEST(JsEncode, AgreesWithLiteralTranslation) {
  gen::Rng rng(62);
  for (int i = 0; i < 200; ++i) {
    Expr lit = gen::any_literal(rng, 3);
    EXPECT_EQ(js::translate(lit), js::encode_value(literal_to_value(lit)));
  }
}

TEST(JsEncode, RoundTripsRandomValues) {
  gen::Rng rng(63);
  for (int i = 0; i < 500; ++i) {
    Value v = literal_to_value(gen::any_literal(rng, 4));
    std::string text = js::encode_value(v);
    Value back;
    ASSERT_NO_THROW(back = jscheck::decode_value(text)) << text;
    EXPECT_EQ(back, v) << text;
    EXPECT_EQ(describe(back), describe(v));
  }
}

TEST(JsEncode, RoundTripsEdgeScalars) {
  for (Value v : {Value(std::int64_t{0}), Value(std::numeric_limits<std::int64_t>::min()),
                  Value(std::numeric_limits<std::int64_t>::max()), Value(-0.0), Value(5e-324),
                  Value(std::numeric_limits<double>::max()), Value(1.0), Value(std::string("\xE2\x80\xA8")),
                  Value(std::string("\0x", 2)), Value(false)}) {
    EXPECT_EQ(describe(jscheck::decode_value(js::encode_value(v))), describe(v));
  }
}

TEST(Hygiene, RandomProgramsTranslateWithEveryNameResolved) {
  gen::Rng rng(64);
  for (int i = 0; i < 300; ++i) {
    Expr e = gen::any_expr(rng, 6);
    std::set<Ident> globals;
    for (const auto& name : free_vars(e)) {
      if (!find_builtin(name)) globals.insert(name);
    }
    std::string text = js::translate(e, globals);
    std::set<std::string> mangled;
    for (const auto& g : globals) mangled.insert(js::mangle(g));
    check_expression(text, mangled);
  }
}

TEST(Hygiene, GeneratedProgramsFormValidModules) {
  gen::Rng rng(65);
  gen::ProgramGen programs(rng);
  for (int i = 0; i < 100; ++i) {
    js::Module m;
    m.define("main", programs.program(4));
    check_module(m.emit());
  }
}

TEST(Hygiene, MandelRowsFormAValidModule) {
  MandelSpec spec;
  spec.width = 8;
  spec.height = 8;
  auto m = js::build_module("rows", mandel_row_expr(spec, 0, 2), {});
  check_module(m.emit());
}

using Fixture = fixtures::JsFixture;

fs::path golden_dir() { return fs::path(QX_GOLDEN_DIR) / "jsgen"; }

std::string render_fixture(const Fixture& f) {
  Expr e = parse_expr(slurp(golden_dir() / (std::string(f.file) + ".qx")));
  return js::build_module(f.name, e, js::parse_rpc_list(f.rpc)).emit();
}

class Golden : public ::testing::TestWithParam<Fixture> {};

TEST_P(Golden, ByteStable) {
  const Fixture& f = GetParam();
  std::string out = render_fixture(f);
  EXPECT_EQ(out, render_fixture(f));
  fs::path expected = golden_dir() / (std::string(f.file) + ".js");
  if (std::getenv("QX_BLESS")) {
    std::ofstream(expected, std::ios::binary) << out;
  }
  ASSERT_TRUE(fs::exists(expected)) << expected;
  EXPECT_EQ(out, slurp(expected));
}

TEST_P(Golden, WellFormedAndScoped) { check_module(render_fixture(GetParam())); }

INSTANTIATE_TEST_SUITE_P(Corpus, Golden, ::testing::ValuesIn(fixtures::kJsFixtures),
                         [](const auto& info) { return std::string(info.param.file); });

TEST(GoldenPrimes, ConsCellsAndRuntimeFilter) {
  std::string out = slurp(golden_dir() / "primes.js");
  std::string body = out.substr(js::preamble().size());
  EXPECT_NE(body.find("var primes = "), std::string::npos);
  EXPECT_NE(body.find("{$: 1, $0: h, $1: primes(RT.filter("), std::string::npos) << body;
  EXPECT_NE(body.find("{$: 0}"), std::string::npos);
  EXPECT_EQ(body.find("RT.cons"), std::string::npos);
}

TEST(GoldenPrimes, MatchesTheSharedProgram) {
  Expr fixture = parse_expr(slurp(golden_dir() / "primes.qx"));
  Expr shared = letrec_in("primes", programs::primes_fn(), var("primes"));
  EXPECT_EQ(print_expr(fixture), print_expr(shared));
}

}  // namespace
}  // namespace qx

namespace qx {
namespace {

TEST(Checker, RejectsMalformedText) {
  for (const char* bad : {"var f = function (x) { return x; ;", "var a = {$: 1, $0: };", "var b = (1 ? 2);",
                          "var c = RT.add(1)(2;", "var d = \"open;", "var e = function (x, x) { return x; };",
                          "var class = 1;", "var g = 1 2;"}) {
    EXPECT_THROW(jscheck::parse_program(bad), jscheck::SyntaxError) << bad;
  }
}

TEST(Checker, ReportsUnresolvedNames) {
  auto prog = jscheck::parse_program("var f = function (x) { return y(x); }; var g = function () { return f; };");
  EXPECT_EQ(jscheck::ScopeChecker({"RT"}).check(prog), std::set<std::string>{"y"});
  auto inner = jscheck::parse_program("var h = function (a) { return function (b) { return a(b)(c); }; };");
  EXPECT_EQ(jscheck::ScopeChecker({}).check(inner), std::set<std::string>{"c"});
}

}  // namespace
}  // namespace qx
