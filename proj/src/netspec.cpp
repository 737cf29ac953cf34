/* Copyright 2026 The SparseCNN Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#include "sparsecnn/netspec.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cstdio>
#include <iomanip>
#include <sstream>

#include "json.hpp"

#include "sparsecnn/errors.hpp"
#include "sparsecnn/ops.hpp"

namespace sparsecnn {

namespace {

struct Token {
  std::string text;  // whitespace removed
  std::size_t offset = 0;
};

std::vector<Token> split_tokens(std::string_view text) {
  std::vector<Token> tokens(1);
  bool started = false;
  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (std::isspace(static_cast<unsigned char>(c))) continue;
    if (c == '-') {
      if (!started) tokens.back().offset = i;
      tokens.emplace_back();
      started = false;
      continue;
    }
    if (!started) {
      tokens.back().offset = i;
      started = true;
    }
    tokens.back().text += c;
  }
  if (!started && !tokens.empty()) tokens.back().offset = text.size();
  return tokens;
}

class TokenReader {
 public:
  explicit TokenReader(const Token& token) : token_(token) {}

  bool done() const { return pos_ == token_.text.size(); }

  bool consume_ci(std::string_view word) {
    if (token_.text.size() - pos_ < word.size()) return false;
    for (std::size_t i = 0; i < word.size(); ++i) {
      if (std::toupper(static_cast<unsigned char>(token_.text[pos_ + i])) != word[i]) return false;
    }
    pos_ += word.size();
    return true;
  }

  bool peek_digit() const { return !done() && std::isdigit(static_cast<unsigned char>(token_.text[pos_])); }

  int integer(std::string_view what) {
    if (!peek_digit()) fail("expected " + std::string(what));
    int value = 0;
    const char* begin = token_.text.data() + pos_;
    const char* end = token_.text.data() + token_.text.size();
    auto [ptr, ec] = std::from_chars(begin, end, value);
    if (ec != std::errc()) fail(std::string(what) + " out of range");
    pos_ += static_cast<std::size_t>(ptr - begin);
    if (value <= 0) fail(std::string(what) + " must be positive");
    return value;
  }

  [[noreturn]] void fail(const std::string& message) const {
    throw ParseError("architecture: " + message + " in token '" + token_.text + "' at byte " +
                         std::to_string(token_.offset),
                     token_.offset);
  }

 private:
  const Token& token_;
  std::size_t pos_ = 0;
};

LayerSpec parse_layer(const Token& token) {
  TokenReader reader(token);
  if (token.text.empty()) reader.fail("empty layer");
  LayerSpec layer;
  if (reader.consume_ci("OUTPUT")) {
    layer = OutputSpec{};
  } else if (reader.consume_ci("FMP")) {
    layer = FmpSpec{};
  } else if (reader.consume_ci("MP")) {
    MaxPoolSpec pool;
    pool.p = reader.integer("pooling size");
    pool.s = reader.consume_ci("/") ? reader.integer("pooling stride") : pool.p;
    layer = pool;
  } else if (reader.peek_digit()) {
    ConvSpec conv;
    conv.n_out = reader.integer("filter count");
    if (!reader.consume_ci("C")) reader.fail("expected 'C'");
    conv.f = reader.integer("filter size");
    conv.s = reader.consume_ci("/") ? reader.integer("convolution stride") : 1;
    layer = conv;
  } else {
    reader.fail("unknown layer");
  }
  if (!reader.done()) reader.fail("unexpected trailing characters");
  return layer;
}

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

// Output size of a hidden layer; nullopt when the size is not admissible.
std::optional<std::int32_t> forward_size(const LayerSpec& layer, std::int32_t m) {
  return std::visit(Overloaded{
                        [&](const ConvSpec& c) -> std::optional<std::int32_t> {
                          if (m < c.f || (m - c.f) % c.s != 0) return std::nullopt;
                          return (m - c.f) / c.s + 1;
                        },
                        [&](const MaxPoolSpec& p) -> std::optional<std::int32_t> {
                          if (m < p.p || (m - p.p) % p.s != 0) return std::nullopt;
                          return (m - p.p) / p.s + 1;
                        },
                        [&](const FmpSpec& f) -> std::optional<std::int32_t> {
                          if (!fmp_size_valid(m, f.ratio)) return std::nullopt;
                          return fmp_out_size(m, f.ratio);
                        },
                        [&](const OutputSpec&) -> std::optional<std::int32_t> { return m; },
                    },
                    layer);
}

std::optional<std::vector<std::int32_t>> forward_sizes(const NetworkSpec& spec, std::int32_t field) {
  std::vector<std::int32_t> sizes{field};
  for (std::size_t i = 0; i < spec.hidden_layers(); ++i) {
    auto next = forward_size(spec.layers[i], sizes.back());
    if (!next) return std::nullopt;
    sizes.push_back(*next);
  }
  return sizes;
}

}  // namespace

bool NetworkSpec::has_fmp() const {
  return std::any_of(layers.begin(), layers.end(), [](const LayerSpec& l) { return std::holds_alternative<FmpSpec>(l); });
}

NetworkSpec parse(std::string_view text, LatticeKind lattice, int n_input) {
  if (n_input < 1) throw InvalidArgument("input feature count must be positive");
  NetworkSpec spec;
  spec.lattice = lattice;
  spec.n_input = n_input;
  const auto tokens = split_tokens(text);
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    LayerSpec layer = parse_layer(tokens[i]);
    const bool is_output = std::holds_alternative<OutputSpec>(layer);
    if (is_output && i + 1 != tokens.size()) {
      throw ParseError("architecture: layers after 'output' at byte " + std::to_string(tokens[i + 1].offset),
                       tokens[i + 1].offset);
    }
    if (is_output && i == 0) throw ParseError("architecture: no layers before 'output'", tokens[i].offset);
    if (std::holds_alternative<FmpSpec>(layer) && lattice != LatticeKind::cubic) {
      throw ParseError("architecture: fractional max pooling requires the cubic lattice, at byte " +
                           std::to_string(tokens[i].offset),
                       tokens[i].offset);
    }
    spec.layers.push_back(layer);
  }
  if (spec.layers.empty() || !std::holds_alternative<OutputSpec>(spec.layers.back())) {
    throw ParseError("architecture: missing '-output' at byte " + std::to_string(text.size()), text.size());
  }
  return spec;
}

std::string render(const LayerSpec& layer) {
  return std::visit(Overloaded{
                        [](const ConvSpec& c) {
                          std::string s = std::to_string(c.n_out) + "C" + std::to_string(c.f);
                          if (c.s != 1) s += "/" + std::to_string(c.s);
                          return s;
                        },
                        [](const MaxPoolSpec& p) {
                          std::string s = "MP" + std::to_string(p.p);
                          if (p.s != p.p) s += "/" + std::to_string(p.s);
                          return s;
                        },
                        [](const FmpSpec&) { return std::string("FMP"); },
                        [](const OutputSpec&) { return std::string("output"); },
                    },
                    layer);
}

std::string render(const NetworkSpec& spec) {
  std::string out;
  for (const auto& layer : spec.layers) {
    if (!out.empty()) out += "-";
    out += render(layer);
  }
  return out;
}

std::vector<std::int32_t> required_input_size(const NetworkSpec& spec) {
  if (spec.has_fmp()) throw PlanError("fractional pooling networks are planned forward from an input scale");
  std::vector<std::int32_t> sizes{1};
  for (std::size_t i = spec.hidden_layers(); i-- > 0;) {
    const std::int64_t m = sizes.back();
    std::int64_t prev = 0;
    if (const auto* c = std::get_if<ConvSpec>(&spec.layers[i])) prev = std::int64_t{c->s} * (m - 1) + c->f;
    if (const auto* p = std::get_if<MaxPoolSpec>(&spec.layers[i])) prev = std::int64_t{p->s} * (m - 1) + p->p;
    if (prev >= kMaxLinearSize) throw PlanError("planned input field exceeds the maximum grid size");
    sizes.push_back(static_cast<std::int32_t>(prev));
  }
  std::reverse(sizes.begin(), sizes.end());
  return sizes;
}

NetworkPlan plan(const NetworkSpec& spec, std::int32_t scale, int n_classes) {
  NetworkPlan result;
  result.spec = spec;
  result.n_classes = n_classes;
  if (!spec.has_fmp()) {
    result.spec.planned_sizes = required_input_size(spec);
  } else {
    constexpr std::int32_t kSearchLimit = 1 << 14;
    std::optional<std::vector<std::int32_t>> sizes;
    for (std::int32_t m = std::max(scale, 1); m < kSearchLimit && !sizes; ++m) {
      auto candidate = forward_sizes(spec, m);
      if (candidate && candidate->back() == 1) sizes = std::move(candidate);
    }
    if (!sizes) {
      throw PlanError("no input field >= " + std::to_string(scale) + " reduces " + render(spec) + " to size 1");
    }
    result.spec.planned_sizes = std::move(*sizes);
  }
  const auto& sizes = result.spec.planned_sizes;
  int features = spec.n_input;
  for (std::size_t i = 0; i < spec.layers.size(); ++i) {
    const LayerSpec& layer = spec.layers[i];
    LayerPlan lp;
    lp.label = render(layer);
    const bool output = std::holds_alternative<OutputSpec>(layer);
    lp.m_in = output ? sizes.back() : sizes[i];
    lp.m_out = output ? sizes.back() : sizes[i + 1];
    lp.n_in = features;
    if (const auto* c = std::get_if<ConvSpec>(&layer)) {
      lp.footprint = filter_volume(spec.lattice, c->f);
      lp.n_out = c->n_out;
      lp.parameters = lp.footprint * lp.n_in * lp.n_out + lp.n_out;
    } else if (const auto* p = std::get_if<MaxPoolSpec>(&layer)) {
      lp.footprint = filter_volume(spec.lattice, p->p);
      lp.n_out = features;
    } else if (std::holds_alternative<FmpSpec>(layer)) {
      lp.footprint = 8;
      lp.n_out = features;
    } else {
      lp.footprint = 1;
      lp.n_out = n_classes;
      lp.parameters = std::int64_t{lp.n_in} * n_classes + n_classes;
    }
    features = lp.n_out;
    result.parameters += lp.parameters;
    result.layers.push_back(lp);
  }
  if (sizes.back() != 1) throw InternalError("planned sizes do not end at 1");
  return result;
}

OpCount count_ops(const NetworkPlan& plan, std::span<const std::int64_t> activity) {
  const std::size_t hidden = plan.spec.hidden_layers();
  if (activity.size() != hidden) {
    throw InvalidArgument("activity list has " + std::to_string(activity.size()) + " entries, network has " +
                          std::to_string(hidden) + " hidden layers");
  }
  OpCount ops;
  for (std::size_t i = 0; i < plan.layers.size(); ++i) {
    const LayerPlan& lp = plan.layers[i];
    LayerOps lo;
    lo.label = lp.label;
    lo.size = lp.m_out;
    lo.footprint = lp.footprint;
    lo.active = i < hidden ? activity[i] : 1;
    if (lo.active < 0) throw InvalidArgument("activity counts must be non-negative");
    const LayerSpec& layer = plan.spec.layers[i];
    if (std::holds_alternative<ConvSpec>(layer) || std::holds_alternative<OutputSpec>(layer)) {
      lo.macs = lo.active * lp.footprint * lp.n_in * lp.n_out;
    }
    ops.total += lo.macs;
    ops.layers.push_back(lo);
  }
  return ops;
}

OpCount count_ops_dense(const NetworkPlan& plan) {
  std::vector<std::int64_t> activity;
  for (std::size_t i = 0; i < plan.spec.hidden_layers(); ++i) {
    activity.push_back(site_count(plan.spec.lattice, plan.layers[i].m_out));
  }
  return count_ops(plan, activity);
}

OpCount count_ops_geometric(const NetworkPlan& plan, const SiteIndex& input_active) {
  if (input_active.shape() != plan.input_shape()) throw InvalidArgument("input activity does not match planned field");
  std::vector<std::int64_t> activity;
  SiteIndexPtr current = std::make_shared<SiteIndex>(input_active);
  for (std::size_t i = 0; i < plan.spec.hidden_layers(); ++i) {
    const LayerSpec& layer = plan.spec.layers[i];
    if (const auto* c = std::get_if<ConvSpec>(&layer)) {
      current = conv_active_sites(*current, FilterGeometry(plan.spec.lattice, c->f, c->s));
    } else if (const auto* p = std::get_if<MaxPoolSpec>(&layer)) {
      current = conv_active_sites(*current, FilterGeometry(plan.spec.lattice, p->p, p->s));
    } else if (const auto* f = std::get_if<FmpSpec>(&layer)) {
      current = fmp_active_sites(*current, fmp_regions(current->shape().m, f->ratio, 0));
    }
    activity.push_back(current->size());
  }
  return count_ops(plan, activity);
}

SiteIndex centered_box(const GridShape& field, std::int32_t side) {
  if (side < 1) throw InvalidArgument("box side must be positive");
  const int d = field.dim();
  Site lo{0, 0, 0};
  for (int i = 0; i < d; ++i) {
    if (is_simplex(field.lattice)) {
      const double center = static_cast<double>(field.m - 1) / (d + 1);
      lo[i] = static_cast<std::int32_t>(std::floor(center - 0.5 * (side - 1) + 0.5));
    } else {
      lo[i] = (field.m - side) / 2;
    }
  }
  std::vector<std::uint64_t> keys;
  const std::int32_t zsize = d == 3 ? side : 1;
  for (std::int32_t x = 0; x < side; ++x) {
    for (std::int32_t y = 0; y < side; ++y) {
      for (std::int32_t z = 0; z < zsize; ++z) {
        const Site s{lo[0] + x, lo[1] + y, d == 3 ? lo[2] + z : 0};
        if (!field.contains(s)) {
          throw InvalidArgument("box of side " + std::to_string(side) + " does not fit field of size " +
                                std::to_string(field.m));
        }
        keys.push_back(pack_site(s));
      }
    }
  }
  return SiteIndex(field, std::move(keys));
}

std::string format_report(const NetworkPlan& plan, const OpCount& ops) {
  std::ostringstream out;
  out << "architecture\t" << render(plan.spec) << "\n";
  out << "lattice\t" << to_string(plan.spec.lattice) << "\n";
  out << "field\t" << plan.field() << "\n";
  out << std::left << std::setw(12) << "layer" << std::right << std::setw(8) << "size" << std::setw(11) << "footprint"
      << std::setw(14) << "a_out" << std::setw(18) << "MACs" << "\n";
  for (const auto& l : ops.layers) {
    out << std::left << std::setw(12) << l.label << std::right << std::setw(8) << l.size << std::setw(11)
        << l.footprint << std::setw(14) << l.active << std::setw(18) << l.macs << "\n";
  }
  char mega[64];
  std::snprintf(mega, sizeof(mega), "%.3f", static_cast<double>(ops.total) / 1e6);
  out << "total\t" << ops.total << " MACs (" << mega << " MegaOps)\n";
  return out.str();
}

std::string format_report_json(const NetworkPlan& plan, const OpCount& ops) {
  nlohmann::json j;
  j["architecture"] = render(plan.spec);
  j["lattice"] = std::string(to_string(plan.spec.lattice));
  j["field"] = plan.field();
  j["layers"] = nlohmann::json::array();
  for (const auto& l : ops.layers) {
    j["layers"].push_back(
        {{"layer", l.label}, {"size", l.size}, {"footprint", l.footprint}, {"a_out", l.active}, {"macs", l.macs}});
  }
  j["total_macs"] = ops.total;
  return j.dump(2);
}

}  // namespace sparsecnn
