#include <algorithm>
#include <array>
#include <memory>
#include <string>
#include <vector>

#include "vsr/cubic_example.hpp"
#include "vsr/errors.hpp"
#include "vsr/expression.hpp"
#include "vsr/models.hpp"

namespace vsr {

namespace {

constexpr std::size_t kMaxDim = 16;

// Variable layout shared by every parsed component:
// x1..x16, u1..u16, e1..e16, T.
constexpr std::size_t kX = 0, kU = kMaxDim, kE = 2 * kMaxDim, kT = 3 * kMaxDim;
using Slots = std::array<double, 3 * kMaxDim + 1>;

const std::vector<std::string>& variable_names() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> v;
    for (const char* p : {"x", "u", "e"})
      for (std::size_t i = 1; i <= kMaxDim; ++i) v.push_back(p + std::to_string(i));
    v.push_back("T");
    return v;
  }();
  return names;
}

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\n");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<Expression> parse_components(std::string_view text) {
  std::vector<Expression> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = text.find(';', start);
    const std::string part = trim(text.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
    if (part.empty()) throw ParseError("empty component in '" + std::string(text) + "'");
    out.push_back(Expression::parse(part, variable_names()));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  if (out.size() > kMaxDim) throw ParseError("at most 16 components are supported");
  return out;
}

// 1 + highest index used in the block starting at `base` (0 if unused).
std::size_t used_dim(const std::vector<Expression>& comps, std::size_t base) {
  std::size_t d = 0;
  for (const auto& c : comps)
    for (std::size_t i = 0; i < kMaxDim; ++i)
      if (c.uses(base + i)) d = std::max(d, i + 1);
  return d;
}

bool uses_slot(const std::vector<Expression>& comps, std::size_t slot) {
  return std::any_of(comps.begin(), comps.end(),
                     [slot](const Expression& c) { return c.uses(slot); });
}

Vec eval_all(const std::vector<Expression>& comps, const Slots& slots) {
  Vec out(comps.size());
  for (std::size_t i = 0; i < comps.size(); ++i) out[i] = comps[i].eval(slots);
  return out;
}

Controller parse_controller(std::string_view text, std::size_t state_dim,
                            std::size_t input_dim) {
  if (text.empty()) {
    // u = e: the error enters additively at the plant input.
    return Controller{input_dim, input_dim,
                      [](std::span<const double>, std::span<const double> e, double) {
                        return Vec(e.begin(), e.end());
                      },
                      "u = e"};
  }
  auto comps = std::make_shared<const std::vector<Expression>>(parse_components(text));
  if (comps->size() != input_dim)
    throw InvalidSpec("controller has " + std::to_string(comps->size()) +
                      " components but the plant has " + std::to_string(input_dim) + " inputs");
  if (used_dim(*comps, kX) > state_dim) throw InvalidSpec("controller refers to a state beyond the plant dimension");
  if (used_dim(*comps, kU) > 0) throw InvalidSpec("controller may not refer to u");
  const std::size_t q = std::max<std::size_t>(1, used_dim(*comps, kE));
  return Controller{q, input_dim,
                    [comps](std::span<const double> x, std::span<const double> e, double T) {
                      Slots s{};
                      std::copy(x.begin(), x.end(), s.begin() + kX);
                      std::copy(e.begin(), e.end(), s.begin() + kE);
                      s[kT] = T;
                      return eval_all(*comps, s);
                    },
                    trim(text)};
}

ClosedLoopModel scalar(std::string name, double (*f)(double x, double T)) {
  return ClosedLoopModel::direct(
      1, 1,
      [f](std::span<const double> x, std::span<const double>, double T) {
        return Vec{f(x[0], T)};
      },
      std::move(name));
}

}  // namespace

VectorField parse_vector_field(std::string_view components) {
  auto comps = std::make_shared<const std::vector<Expression>>(parse_components(components));
  const std::size_t n = comps->size();
  if (used_dim(*comps, kX) > n)
    throw InvalidSpec("vector field refers to a state beyond its " + std::to_string(n) + " components");
  if (used_dim(*comps, kE) > 0 || uses_slot(*comps, kT))
    throw InvalidSpec("vector field may only refer to x and u");
  const std::size_t m = std::max<std::size_t>(1, used_dim(*comps, kU));
  return VectorField{n, m,
                     [comps](std::span<const double> x, std::span<const double> u) {
                       Slots s{};
                       std::copy(x.begin(), x.end(), s.begin() + kX);
                       std::copy(u.begin(), u.end(), s.begin() + kU);
                       return eval_all(*comps, s);
                     },
                     trim(components)};
}

ClosedLoopModel make_model(std::string_view reference, std::string_view controller) {
  const std::string ref = trim(reference);
  const bool plain = controller.empty();
  auto no_controller = [&] {
    if (!plain) throw InvalidSpec("model '" + ref + "' takes no controller");
  };
  if (ref == "cubic_example" || ref == "paper_example") {
    no_controller();
    return example::example_closed_loop();
  }
  if (ref == "cubic_example:composed") {
    no_controller();
    return example::example_composed();
  }
  if (ref == "identity") {
    no_controller();
    return scalar(ref, [](double x, double) { return x; });
  }
  if (ref == "zero") {
    no_controller();
    return scalar(ref, [](double, double) { return 0.0; });
  }
  if (ref == "unstable") {
    no_controller();
    return scalar(ref, [](double x, double T) { return x + T * x; });
  }
  if (ref == "drift") {
    no_controller();
    return scalar(ref, [](double x, double T) { return x + T; });
  }

  const auto colon = ref.find(':');
  if (colon == std::string::npos) throw InvalidSpec("unknown model '" + ref + "'");
  const std::string kind = ref.substr(0, colon);
  const std::string body = ref.substr(colon + 1);

  if (kind == "map") {
    no_controller();
    auto comps = std::make_shared<const std::vector<Expression>>(parse_components(body));
    const std::size_t n = comps->size();
    if (used_dim(*comps, kX) > n) throw InvalidSpec("map refers to a state beyond its components");
    if (used_dim(*comps, kU) > 0) throw InvalidSpec("map may not refer to u");
    const std::size_t q = std::max<std::size_t>(1, used_dim(*comps, kE));
    return ClosedLoopModel::direct(
        n, q,
        [comps](std::span<const double> x, std::span<const double> e, double T) {
          Slots s{};
          std::copy(x.begin(), x.end(), s.begin() + kX);
          std::copy(e.begin(), e.end(), s.begin() + kE);
          s[kT] = T;
          return eval_all(*comps, s);
        },
        ref);
  }

  DiscreteStepMap step;
  if (kind == "euler")
    step.method = StepMethod::Euler;
  else if (kind == "rk4")
    step.method = StepMethod::RK4;
  else if (kind == "exact")
    step.method = StepMethod::TightIntegration;
  else
    throw InvalidSpec("unknown model kind '" + kind + "'");
  step.field = parse_vector_field(body);
  Controller ctl = parse_controller(controller, step.field->state_dim, step.field->input_dim);
  std::string name = ref;
  if (!plain) name += " | u = " + trim(controller);
  return ClosedLoopModel::composed(std::move(step), std::move(ctl), std::move(name));
}

}  // namespace vsr
