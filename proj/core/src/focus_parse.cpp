#include "gaplm/focus_parse.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>

#include "gaplm/error.hpp"

namespace gaplm {
namespace {

constexpr std::array<std::string_view, 4> kPrefixes = {"beta:", "lincomb:", "eta:", "const:"};

bool starts_term(std::string_view s) {
  return std::any_of(kPrefixes.begin(), kPrefixes.end(), [&](std::string_view p) { return s.starts_with(p); });
}

[[noreturn]] void fail(std::string_view text, const std::string& why) {
  throw ConfigError("focus '" + std::string(text) + "': " + why);
}

double number(std::string_view s, std::string_view text) {
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || ec != std::errc() || ptr != s.data() + s.size() || !std::isfinite(v)) {
    fail(text, "'" + std::string(s) + "' is not a number");
  }
  return v;
}

int beta_index(std::string_view name, const FocusContext& ctx, std::string_view text) {
  const int j = ctx.partition.index_of(name);
  if (j < 0) fail(text, "unknown linear covariate '" + std::string(name) + "'");
  return j;
}

// "0.5*A-1e-3*B+C" -> {(0.5,A), (-1e-3,B), (1,C)}
void parse_lincomb(std::string_view body, const FocusContext& ctx, FocusSpec& out, std::string_view text) {
  if (body.empty()) fail(text, "empty lincomb");
  std::size_t pos = 0;
  while (pos < body.size()) {
    double sign = 1.0;
    if (body[pos] == '+' || body[pos] == '-') {
      if (body[pos] == '-') sign = -1.0;
      ++pos;
    }
    std::size_t name_start = pos;
    double coef = 1.0;
    double parsed = 0.0;
    const auto [ptr, ec] = std::from_chars(body.data() + pos, body.data() + body.size(), parsed);
    if (ec == std::errc() && ptr < body.data() + body.size() && *ptr == '*') {
      coef = parsed;
      name_start = static_cast<std::size_t>(ptr - body.data()) + 1;
    }
    const std::size_t name_end = std::min(body.find_first_of("+-", name_start), body.size());
    const std::string_view name = body.substr(name_start, name_end - name_start);
    if (name.empty()) fail(text, "missing covariate name in lincomb");
    out.coefficients(beta_index(name, ctx, text)) += sign * coef;
    pos = name_end;
  }
}

}  // namespace

FocusSpec parse_focus(std::string_view text, const FocusContext& context) {
  FocusSpec focus;
  focus.coefficients = Eigen::VectorXd::Zero(context.partition.d());
  std::string_view body = text;
  const auto eq = text.find('=');
  if (eq != std::string_view::npos) {
    focus.name = std::string(text.substr(0, eq));
    body = text.substr(eq + 1);
    if (focus.name.empty()) fail(text, "empty focus name");
  } else {
    focus.name = std::string(text);
  }
  if (!starts_term(body)) fail(text, "expected beta:, lincomb:, eta: or const:");

  std::vector<std::string_view> terms;
  std::size_t start = 0;
  for (std::size_t i = 0; i < body.size(); ++i) {
    if (body[i] == '+' && starts_term(body.substr(i + 1))) {
      terms.push_back(body.substr(start, i - start));
      start = i + 1;
    }
  }
  terms.push_back(body.substr(start));

  for (const auto term : terms) {
    if (term.starts_with("beta:")) {
      focus.coefficients(beta_index(term.substr(5), context, text)) += 1.0;
    } else if (term.starts_with("lincomb:")) {
      parse_lincomb(term.substr(8), context, focus, text);
    } else if (term.starts_with("const:")) {
      focus.constant += number(term.substr(6), text);
    } else {
      const auto at = term.find('@');
      if (at == std::string_view::npos) fail(text, "eta term needs <name>@<value>");
      const std::string_view name = term.substr(4, at - 4);
      const auto it = std::find_if(context.smooth.begin(), context.smooth.end(),
                                   [&](const ColumnTransform& t) { return t.name == name; });
      if (it == context.smooth.end()) fail(text, "unknown smooth covariate '" + std::string(name) + "'");
      const int a = static_cast<int>(it - context.smooth.begin());
      if (std::any_of(focus.eta_terms.begin(), focus.eta_terms.end(),
                      [&](const EtaTerm& e) { return e.covariate == a; })) {
        fail(text, "smooth covariate '" + std::string(name) + "' appears twice");
      }
      const double u = it->unit(number(term.substr(at + 1), text));
      if (u < -1e-9 || u > 1.0 + 1e-9) {
        fail(text, "evaluation point for '" + std::string(name) + "' lies outside the training range");
      }
      focus.eta_terms.push_back({a, std::clamp(u, 0.0, 1.0)});
    }
  }
  return focus;
}

}  // namespace gaplm
