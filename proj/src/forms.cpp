#include "qx/forms.hpp"

#include <array>
#include <charconv>

namespace qx::forms {

namespace {

constexpr std::array<std::string_view, 8> kTags = {"div", "p", "input", "label", "span", "button", "fieldset", "form"};

bool valid_attr_name(std::string_view n) {
  if (n.empty() || n[0] < 'a' || n[0] > 'z') return false;
  for (char c : n) {
    if (!((c >= 'a' && c <= 'z') || (c >= '0' && c <= '9') || c == '-')) return false;
  }
  return true;
}

void render_into(std::string& out, const Html& h) {
  if (h.is_text()) {
    out += escape(h.content());
    return;
  }
  out += '<';
  out += h.tag();
  for (const auto& [name, value] : h.attrs()) {
    out += ' ';
    out += name;
    out += "=\"";
    out += escape(value);
    out += '"';
  }
  if (void_tag(h.tag())) {
    out += " />";
    return;
  }
  out += '>';
  for (const auto& c : h.children()) render_into(out, c);
  out += "</";
  out += h.tag();
  out += '>';
}

}  // namespace

bool allowed_tag(std::string_view tag) {
  for (auto t : kTags) {
    if (t == tag) return true;
  }
  return false;
}

bool void_tag(std::string_view tag) { return tag == "input"; }

Html Html::text(std::string content) {
  Html h;
  h.is_text_ = true;
  h.content_ = std::move(content);
  return h;
}

Html Html::element(std::string tag, Attrs attrs, std::vector<Html> children) {
  if (!allowed_tag(tag)) throw FormError("tag not allowed: " + tag);
  if (void_tag(tag) && !children.empty()) throw FormError("<" + tag + "> takes no children");
  for (std::size_t i = 0; i < attrs.size(); ++i) {
    if (!valid_attr_name(attrs[i].first)) throw FormError("bad attribute name: " + attrs[i].first);
    for (std::size_t j = 0; j < i; ++j) {
      if (attrs[j].first == attrs[i].first) throw FormError("repeated attribute: " + attrs[i].first);
    }
  }
  Html h;
  h.tag_ = std::move(tag);
  h.attrs_ = std::move(attrs);
  h.children_ = std::move(children);
  return h;
}

const std::string* Html::attr(std::string_view name) const {
  for (const auto& [k, v] : attrs_) {
    if (k == name) return &v;
  }
  return nullptr;
}

std::string escape(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

std::string render_html(const Html& h) {
  std::string out;
  render_into(out, h);
  return out;
}

std::string render_html(const Nodes& hs) {
  std::string out;
  for (const auto& h : hs) render_into(out, h);
  return out;
}

Html text(std::string s) { return Html::text(std::move(s)); }
Html div(Nodes children) { return Html::element("div", {}, std::move(children)); }
Html p(Nodes children) { return Html::element("p", {}, std::move(children)); }
Html span(Attrs attrs, Nodes children) { return Html::element("span", std::move(attrs), std::move(children)); }
Html label(Attrs attrs, Nodes children) { return Html::element("label", std::move(attrs), std::move(children)); }
Html button(Attrs attrs, Nodes children) { return Html::element("button", std::move(attrs), std::move(children)); }
Html fieldset(Attrs attrs, Nodes children) {
  return Html::element("fieldset", std::move(attrs), std::move(children));
}
Html input(Attrs attrs) { return Html::element("input", std::move(attrs)); }

std::string field_name(int index) { return "f" + std::to_string(index); }

Formlet<std::string> text_input(std::string default_value) {
  return Formlet<std::string>(
      {default_value},
      [default_value](int first) {
        return Nodes{input({{"type", "text"}, {"name", field_name(first)}, {"value", default_value}})};
      },
      [default_value](const Inputs& in, int first) {
        auto it = in.find(field_name(first));
        return Result<std::string>::ok(it == in.end() ? default_value : it->second);
      });
}

std::optional<std::int64_t> parse_int(std::string_view s) {
  std::string_view digits = s.substr(!s.empty() && s[0] == '-' ? 1 : 0);
  if (digits.empty()) return std::nullopt;
  for (char c : digits) {
    if (c < '0' || c > '9') return std::nullopt;
  }
  std::int64_t v = 0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || p != s.data() + s.size()) return std::nullopt;
  return v;
}

Formlet<std::int64_t> validate_int(const Formlet<std::string>& f, std::string message) {
  if (f.field_count() == 0) throw FormError("validation needs a formlet with a field");
  return Formlet<std::int64_t>(
      f.defaults(), [f](int first) { return f.render_at(first); },
      [f, message](const Inputs& in, int first) {
        Result<std::string> r = f.collect(in, first);
        if (!r.ok()) return Result<std::int64_t>::err(r.errors());
        if (auto v = parse_int(r.value())) return Result<std::int64_t>::ok(*v);
        return Result<std::int64_t>::err({{field_name(first), message}});
      });
}

Enhancer with_text_label(std::string label) { return {EnhanceKind::text_label, std::move(label)}; }
Enhancer with_validation_icon() { return {EnhanceKind::validation_icon, {}}; }
Enhancer with_submit_and_reset_buttons() { return {EnhanceKind::submit_and_reset_buttons, {}}; }
Enhancer with_form_container() { return {EnhanceKind::form_container, {}}; }

Nodes decorate(const Enhancer& e, Nodes inner, int first) {
  switch (e.kind) {
    case EnhanceKind::text_label:
      inner.insert(inner.begin(), label({{"for", field_name(first)}}, {text(e.label)}));
      return inner;
    case EnhanceKind::validation_icon:
      inner.push_back(span({{"class", "validation-icon"}}));
      return inner;
    case EnhanceKind::submit_and_reset_buttons:
      inner.push_back(div({button({{"type", "submit"}}, {text("Submit")}),
                           button({{"type", "reset"}}, {text("Reset")})}));
      return inner;
    case EnhanceKind::form_container: return {fieldset({{"class", "form-container"}}, std::move(inner))};
  }
  throw std::logic_error("unknown enhancer");
}

Html button_page_body() {
  return div({p({text("Press to retrieve data")}), input({{"type", "Button"}, {"value", "Get Data"}})});
}

Formlet<std::int64_t> max_number_formlet() {
  return validate_int(text_input("100"), "Must be int") | with_text_label("Enter max number:") |
         with_validation_icon() | with_submit_and_reset_buttons() | with_form_container();
}

Html formlet_page_body() {
  Nodes kids = max_number_formlet().render_at(0);
  kids.push_back(p({text("")}));
  return div(std::move(kids));
}

std::string demo_page() {
  return "<!DOCTYPE html>\n" + render_html(button_page_body()) + "\n" + render_html(formlet_page_body()) + "\n";
}

}  // namespace qx::forms
