#pragma once

// Layout trees and applicative formlets.

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <type_traits>
#include <utility>
#include <vector>

namespace qx::forms {

class FormError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

using Attrs = std::vector<std::pair<std::string, std::string>>;

/// An element from a fixed tag allowlist, or a text node.
class Html {
 public:
  static Html text(std::string content);
  /// Throws FormError for tags outside the allowlist, bad or repeated
  /// attribute names, and children under a void element.
  static Html element(std::string tag, Attrs attrs = {}, std::vector<Html> children = {});

  bool is_text() const { return is_text_; }
  const std::string& tag() const { return tag_; }
  const std::string& content() const { return content_; }
  const Attrs& attrs() const { return attrs_; }
  const std::vector<Html>& children() const { return children_; }
  const std::string* attr(std::string_view name) const;

  friend bool operator==(const Html&, const Html&) = default;

 private:
  Html() = default;

  bool is_text_ = false;
  std::string tag_;
  std::string content_;
  Attrs attrs_;
  std::vector<Html> children_;
};

using Nodes = std::vector<Html>;

bool allowed_tag(std::string_view tag);
bool void_tag(std::string_view tag);

/// `&`, `<`, `>` and `"` as entities.
std::string escape(std::string_view s);

std::string render_html(const Html& h);
std::string render_html(const Nodes& hs);

Html text(std::string s);
Html div(Nodes children);
Html p(Nodes children);
Html span(Attrs attrs, Nodes children = {});
Html label(Attrs attrs, Nodes children);
Html button(Attrs attrs, Nodes children);
Html fieldset(Attrs attrs, Nodes children);
Html input(Attrs attrs);

// --- formlets ------------------------------------------------------------

using Inputs = std::map<std::string, std::string>;

struct FieldError {
  std::string field;
  std::string message;
  friend bool operator==(const FieldError&, const FieldError&) = default;
};

using Errors = std::vector<FieldError>;

/// Field name for index i: f<i>.
std::string field_name(int index);

template <class T>
class Result {
 public:
  static Result ok(T v) { return Result(std::move(v), {}); }
  static Result err(Errors e) { return Result(std::nullopt, std::move(e)); }

  bool ok() const { return value_.has_value(); }
  const T& value() const {
    if (!value_) throw std::logic_error("formlet result holds errors");
    return *value_;
  }
  const Errors& errors() const { return errors_; }

  friend bool operator==(const Result&, const Result&) = default;

 private:
  Result(std::optional<T> v, Errors e) : value_(std::move(v)), errors_(std::move(e)) {}

  std::optional<T> value_;
  Errors errors_;
};

/// Markup plus a typed collector over fields f<first> .. f<first+count-1>.
template <class T>
class Formlet {
 public:
  using value_type = T;
  using RenderFn = std::function<Nodes(int first)>;
  using CollectFn = std::function<Result<T>(const Inputs&, int first)>;

  Formlet(std::vector<std::string> defaults, RenderFn render, CollectFn collect)
      : defaults_(std::move(defaults)), render_(std::move(render)), collect_(std::move(collect)) {}

  int field_count() const { return static_cast<int>(defaults_.size()); }
  const std::vector<std::string>& defaults() const { return defaults_; }

  Nodes render_at(int first = 0) const { return render_(first); }
  Result<T> collect(const Inputs& in, int first = 0) const { return collect_(in, first); }

 private:
  std::vector<std::string> defaults_;
  RenderFn render_;
  CollectFn collect_;
};

/// One text field. Collects the submitted string, or the default when the
/// field is absent.
Formlet<std::string> text_input(std::string default_value);

/// Optional `-` then decimal digits, in signed 64-bit range.
std::optional<std::int64_t> parse_int(std::string_view s);

/// Integer validation. A rejected value is reported against the formlet's
/// first field.
Formlet<std::int64_t> validate_int(const Formlet<std::string>& f, std::string message);

template <class T, class F>
auto map_formlet(const Formlet<T>& f, F fn) -> Formlet<std::decay_t<std::invoke_result_t<F&, const T&>>> {
  using U = std::decay_t<std::invoke_result_t<F&, const T&>>;
  return Formlet<U>(
      f.defaults(), [f](int first) { return f.render_at(first); },
      [f, fn](const Inputs& in, int first) mutable {
        Result<T> r = f.collect(in, first);
        if (!r.ok()) return Result<U>::err(r.errors());
        return Result<U>::ok(fn(r.value()));
      });
}

/// a's fields then b's, inside one div. Both sides are always collected and
/// their errors concatenated.
template <class T, class U>
Formlet<std::pair<T, U>> pair_formlet(const Formlet<T>& a, const Formlet<U>& b) {
  std::vector<std::string> defaults = a.defaults();
  defaults.insert(defaults.end(), b.defaults().begin(), b.defaults().end());
  int offset = a.field_count();
  return Formlet<std::pair<T, U>>(
      std::move(defaults),
      [a, b, offset](int first) {
        Nodes kids = a.render_at(first);
        Nodes rest = b.render_at(first + offset);
        kids.insert(kids.end(), rest.begin(), rest.end());
        return Nodes{div(std::move(kids))};
      },
      [a, b, offset](const Inputs& in, int first) {
        Result<T> ra = a.collect(in, first);
        Result<U> rb = b.collect(in, first + offset);
        if (ra.ok() && rb.ok()) return Result<std::pair<T, U>>::ok({ra.value(), rb.value()});
        Errors all = ra.errors();
        all.insert(all.end(), rb.errors().begin(), rb.errors().end());
        return Result<std::pair<T, U>>::err(std::move(all));
      });
}

enum class EnhanceKind { text_label, validation_icon, submit_and_reset_buttons, form_container };

struct Enhancer {
  EnhanceKind kind;
  std::string label;  // text_label only
};

Enhancer with_text_label(std::string label);
Enhancer with_validation_icon();
Enhancer with_submit_and_reset_buttons();
Enhancer with_form_container();

/// Wraps markup rendered from field `first`.
Nodes decorate(const Enhancer& e, Nodes inner, int first);

/// Same collector, decorated markup.
template <class T>
Formlet<T> enhance(const Formlet<T>& f, Enhancer e) {
  return Formlet<T>(
      f.defaults(), [f, e](int first) { return decorate(e, f.render_at(first), first); },
      [f](const Inputs& in, int first) { return f.collect(in, first); });
}

template <class T>
Formlet<T> operator|(const Formlet<T>& f, const Enhancer& e) {
  return enhance(f, e);
}

template <class T>
Result<T> run_formlet(const Formlet<T>& f, const Inputs& in) {
  return f.collect(in, 0);
}

// --- demo page -----------------------------------------------------------

/// The button page: a prompt paragraph and a "Get Data" button.
Html button_page_body();

/// The max-number formlet: input "100", integer validation, then label,
/// icon, buttons and container.
Formlet<std::int64_t> max_number_formlet();

/// The formlet's markup followed by an empty result paragraph, in one div.
Html formlet_page_body();

/// Doctype, then both bodies, one per line.
std::string demo_page();

}  // namespace qx::forms
