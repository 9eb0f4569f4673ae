var RT = (function () {
  "use strict";
  var nil = {$: 0};
  function cons(h, t) { return {$: 1, $0: h, $1: t}; }
  function fail(code, detail) {
    var e = new Error(detail);
    e.code = code;
    throw e;
  }
  function toArray(l) {
    var out = [];
    while (l.$ === 1) { out.push(l.$0); l = l.$1; }
    return out;
  }
  function fromArray(xs) {
    var l = nil;
    for (var i = xs.length - 1; i >= 0; i--) { l = cons(xs[i], l); }
    return l;
  }
  function isCell(v) { return v !== null && typeof v === "object"; }
  function equal(a, b) {
    while (isCell(a) && isCell(b)) {
      if (a.$ !== b.$) { return false; }
      if (a.$ === 0) { return true; }
      if (!equal(a.$0, b.$0)) { return false; }
      a = a.$1;
      b = b.$1;
    }
    return a === b;
  }
  function isInt(x) { return typeof x === "number" && Math.floor(x) === x; }
  function nonEmpty(name, l) {
    if (l.$ === 0) { fail("empty-list", name + " of empty list"); }
    return l;
  }
  function fn2(f) { return function (a) { return function (b) { return f(a, b); }; }; }
  function fn3(f) {
    return function (a) { return function (b) { return function (c) { return f(a, b, c); }; }; };
  }
  return {
    add: fn2(function (a, b) { return a + b; }),
    sub: fn2(function (a, b) { return a - b; }),
    mul: fn2(function (a, b) { return a * b; }),
    div: fn2(function (a, b) {
      if (isInt(a) && isInt(b)) {
        if (b === 0) { fail("div-zero", "integer division by zero"); }
        return Math.trunc(a / b);
      }
      return a / b;
    }),
    mod: fn2(function (a, b) {
      if (b === 0) { fail("div-zero", "integer division by zero"); }
      return a % b;
    }),
    neg: function (a) { return -a; },
    lt: fn2(function (a, b) { return a < b; }),
    le: fn2(function (a, b) { return a <= b; }),
    gt: fn2(function (a, b) { return a > b; }),
    ge: fn2(function (a, b) { return a >= b; }),
    eq: fn2(equal),
    ne: fn2(function (a, b) { return !equal(a, b); }),
    and: fn2(function (a, b) { return a && b; }),
    or: fn2(function (a, b) { return a || b; }),
    not: function (a) { return !a; },
    toFloat: function (a) { return a; },
    toInt: function (a) { return Math.trunc(a); },
    sqrt: function (a) { return Math.sqrt(a); },
    abs: function (a) { return Math.abs(a); },
    min: fn2(function (a, b) { return b < a ? b : a; }),
    max: fn2(function (a, b) { return b > a ? b : a; }),
    cons: fn2(cons),
    head: function (l) { return nonEmpty("head", l).$0; },
    tail: function (l) { return nonEmpty("tail", l).$1; },
    isEmpty: function (l) { return l.$ === 0; },
    length: function (l) { return toArray(l).length; },
    append: fn2(function (a, b) {
      var xs = toArray(a);
      var l = b;
      for (var i = xs.length - 1; i >= 0; i--) { l = cons(xs[i], l); }
      return l;
    }),
    map: fn2(function (f, l) { return fromArray(toArray(l).map(function (x) { return f(x); })); }),
    filter: fn2(function (f, l) { return fromArray(toArray(l).filter(function (x) { return f(x); })); }),
    foldl: fn3(function (f, acc, l) {
      var xs = toArray(l);
      for (var i = 0; i < xs.length; i++) { acc = f(acc)(xs[i]); }
      return acc;
    }),
    sum: function (l) {
      var xs = toArray(l);
      var s = 0;
      for (var i = 0; i < xs.length; i++) { s += xs[i]; }
      return s;
    },
    range: fn2(function (lo, hi) {
      var l = nil;
      for (var i = hi; i >= lo; i--) { l = cons(i, l); }
      return l;
    }),
    // Arguments arrive in the tagged encoding; a transport replaces this.
    rpc: function (name, args) { fail("rpc-unbound", "no transport bound for " + name); }
  };
})();
var texts = {$: 1, $0: "plain", $1: {$: 1, $0: "say \"hi\"", $1: {$: 1, $0: "back\\slash", $1: {$: 1, $0: "tab\there\nnewline\rcr", $1: {$: 1, $0: "bell\u0007 del\u007f", $1: {$: 1, $0: "héllo wörld ∑ 日本", $1: {$: 1, $0: "line sep: \u2028 para sep: \u2029", $1: {$: 1, $0: "", $1: {$: 0}}}}}}}}};
