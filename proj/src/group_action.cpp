#include "ikalab/group_action.hpp"

#include <charconv>
#include <stdexcept>

#include "ikalab/errors.hpp"

namespace ikalab {

namespace {

using u64 = std::uint64_t;
__extension__ using u128 = unsigned __int128;
__extension__ using i128 = __int128;

u64 mul_mod(u64 a, u64 b, u64 m) { return static_cast<u64>(static_cast<u128>(a) * b % m); }

u64 add_mod(u64 a, u64 b, u64 m) { return static_cast<u64>((static_cast<u128>(a) + b) % m); }

u64 sub_mod(u64 a, u64 b, u64 m) { return add_mod(a, m - b % m, m); }

u64 pow_mod(u64 base, u64 exp, u64 m) {
  u64 result = 1 % m;
  base %= m;
  while (exp > 0) {
    if (exp & 1) result = mul_mod(result, base, m);
    base = mul_mod(base, base, m);
    exp >>= 1;
  }
  return result;
}

// Modular inverse by extended Euclid; m need not be prime but gcd(a, m) = 1.
u64 inv_mod(u64 a, u64 m) {
  i128 t = 0, new_t = 1;
  i128 r = m, new_r = a % m;
  while (new_r != 0) {
    const i128 quotient = r / new_r;
    t -= quotient * new_t;
    std::swap(t, new_t);
    r -= quotient * new_r;
    std::swap(r, new_r);
  }
  if (r != 1) throw std::domain_error("inv_mod: not invertible");
  if (t < 0) t += m;
  return static_cast<u64>(t);
}

// Curve arithmetic on y^2 = x^3 + ax + b over F_p; nullopt is the identity.
using CurvePoint = std::optional<AffinePoint>;

bool on_curve(const EllipticParams& c, AffinePoint pt) {
  if (pt.x >= c.p || pt.y >= c.p) return false;
  const u64 lhs = mul_mod(pt.y, pt.y, c.p);
  const u64 x3 = mul_mod(mul_mod(pt.x, pt.x, c.p), pt.x, c.p);
  const u64 rhs = add_mod(add_mod(x3, mul_mod(c.a, pt.x, c.p), c.p), c.b, c.p);
  return lhs == rhs;
}

CurvePoint curve_add(const EllipticParams& c, CurvePoint lhs, CurvePoint rhs) {
  if (!lhs) return rhs;
  if (!rhs) return lhs;
  const u64 p = c.p;
  const AffinePoint a = *lhs;
  const AffinePoint b = *rhs;
  u64 slope = 0;
  if (a.x == b.x) {
    if (add_mod(a.y, b.y, p) == 0) return std::nullopt;
    // Doubling: (3x^2 + a) / 2y
    const u64 num = add_mod(mul_mod(3, mul_mod(a.x, a.x, p), p), c.a, p);
    slope = mul_mod(num, inv_mod(mul_mod(2, a.y, p), p), p);
  } else {
    slope = mul_mod(sub_mod(b.y, a.y, p), inv_mod(sub_mod(b.x, a.x, p), p), p);
  }
  const u64 x = sub_mod(sub_mod(mul_mod(slope, slope, p), a.x, p), b.x, p);
  const u64 y = sub_mod(mul_mod(slope, sub_mod(a.x, x, p), p), a.y, p);
  return AffinePoint{x, y};
}

CurvePoint curve_mul(const EllipticParams& c, u64 k, CurvePoint pt) {
  CurvePoint acc;
  CurvePoint addend = pt;
  while (k > 0) {
    if (k & 1) acc = curve_add(c, acc, addend);
    addend = curve_add(c, addend, addend);
    k >>= 1;
  }
  return acc;
}

}  // namespace

// ---------------------------------------------------------------------------
// SetPoint

std::uint64_t SetPoint::residue_value() const {
  if (!is_residue()) throw ContextError("SetPoint is not a residue");
  return std::get<std::uint64_t>(payload_);
}

AffinePoint SetPoint::affine_value() const {
  if (!is_affine()) throw ContextError("SetPoint is not an affine point");
  return std::get<AffinePoint>(payload_);
}

std::string SetPoint::encode() const {
  if (is_residue()) return std::to_string(residue_value());
  if (is_infinity()) return "inf";
  const AffinePoint pt = affine_value();
  return std::to_string(pt.x) + "," + std::to_string(pt.y);
}

namespace {

u64 parse_u64(std::string_view text) {
  u64 value = 0;
  const auto* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (text.empty() || ec != std::errc() || ptr != end) {
    throw InvalidPointError("malformed point encoding '" + std::string(text) + "'");
  }
  return value;
}

}  // namespace

SetPoint SetPoint::decode(std::string_view text) {
  if (text == "inf") return infinity();
  const auto comma = text.find(',');
  if (comma == std::string_view::npos) return residue(parse_u64(text));
  return affine(parse_u64(text.substr(0, comma)), parse_u64(text.substr(comma + 1)));
}

// ---------------------------------------------------------------------------
// ActionParams

bool is_prime(std::uint64_t n) {
  if (n < 2) return false;
  if (n % 2 == 0) return n == 2;
  for (u64 d = 3; d <= n / d; d += 2) {
    if (n % d == 0) return false;
  }
  return true;
}

ActionParams ActionParams::modexp(ModexpParams params) {
  if (params.p < 3 || !is_prime(params.p)) throw ConfigError("p", "field modulus must be an odd prime");
  if (!is_prime(params.q)) throw ConfigError("q", "subgroup order must be prime");
  if ((params.p - 1) % params.q != 0) throw ConfigError("q", "subgroup order must divide p - 1");
  if (params.s < 2 || params.s >= params.p) throw ConfigError("s", "generator must lie in [2, p-1]");
  if (pow_mod(params.s, params.q, params.p) != 1) throw ConfigError("s", "generator does not have order q");
  return ActionParams(params);
}

ActionParams ActionParams::elliptic(EllipticParams params) {
  const u64 p = params.p;
  if (p < 5 || !is_prime(p)) throw ConfigError("p", "field modulus must be a prime greater than 3");
  if (params.a >= p) throw ConfigError("a", "coefficient must be reduced modulo p");
  if (params.b >= p) throw ConfigError("b", "coefficient must be reduced modulo p");
  const u64 disc = add_mod(mul_mod(4, mul_mod(mul_mod(params.a, params.a, p), params.a, p), p),
                           mul_mod(27, mul_mod(params.b, params.b, p), p), p);
  if (disc == 0) throw ConfigError("a", "curve is singular (4a^3 + 27b^2 = 0 mod p)");
  if (!on_curve(params, params.s)) throw ConfigError("s", "base point is not on the curve");
  if (!is_prime(params.q)) throw ConfigError("q", "base point order must be prime");
  if (curve_mul(params, params.q, params.s).has_value()) {
    throw ConfigError("q", "q * s is not the point at infinity");
  }
  return ActionParams(params);
}

ActionParams ActionParams::preset(std::string_view name) {
  if (name == "modexp") return modexp({.p = 23, .q = 11, .s = 2});
  if (name == "elliptic") return elliptic({.p = 17, .a = 2, .b = 2, .s = {5, 1}, .q = 19});
  throw ConfigError("backend", "unknown preset '" + std::string(name) + "'");
}

Backend ActionParams::backend() const {
  return std::holds_alternative<ModexpParams>(params_) ? Backend::modexp : Backend::elliptic;
}

std::string_view ActionParams::backend_name() const {
  return backend() == Backend::modexp ? "modexp" : "elliptic";
}

std::uint64_t ActionParams::order() const {
  return std::visit([](const auto& p) { return p.q; }, params_);
}

SetPoint ActionParams::base() const {
  if (backend() == Backend::modexp) return SetPoint::residue(modexp_params().s);
  const AffinePoint s = elliptic_params().s;
  return SetPoint::affine(s.x, s.y);
}

bool operator==(const ActionParams& lhs, const ActionParams& rhs) {
  if (lhs.backend() != rhs.backend()) return false;
  if (lhs.backend() == Backend::modexp) {
    const auto& a = lhs.modexp_params();
    const auto& b = rhs.modexp_params();
    return a.p == b.p && a.q == b.q && a.s == b.s;
  }
  const auto& a = lhs.elliptic_params();
  const auto& b = rhs.elliptic_params();
  return a.p == b.p && a.a == b.a && a.b == b.b && a.s == b.s && a.q == b.q;
}

// ---------------------------------------------------------------------------
// GroupAction

GroupScalar GroupAction::scalar(std::uint64_t value) const {
  GroupScalar g{value};
  check_scalar(g);
  return g;
}

void GroupAction::check_scalar(GroupScalar g) const {
  if (g.value < 1 || g.value >= order()) {
    throw ContextError("scalar " + std::to_string(g.value) + " outside [1, " + std::to_string(order() - 1) + "]");
  }
}

void GroupAction::check_point(const SetPoint& x) const {
  const bool modexp = params_.backend() == Backend::modexp;
  if (modexp != x.is_residue()) {
    throw ContextError("point '" + x.encode() + "' does not belong to the " +
                       std::string(params_.backend_name()) + " backend");
  }
  if (!validate_point(x)) throw InvalidPointError("point '" + x.encode() + "' is not in the orbit");
}

bool GroupAction::validate_point(const SetPoint& x) const {
  if (params_.backend() == Backend::modexp) {
    if (!x.is_residue()) return false;
    const auto& mp = params_.modexp_params();
    const u64 v = x.residue_value();
    return v >= 2 && v < mp.p && pow_mod(v, mp.q, mp.p) == 1;
  }
  if (!x.is_affine()) return false;
  const auto& ep = params_.elliptic_params();
  const AffinePoint pt = x.affine_value();
  return on_curve(ep, pt) && !curve_mul(ep, ep.q, pt).has_value();
}

SetPoint GroupAction::act(GroupScalar g, const SetPoint& x) const {
  check_scalar(g);
  check_point(x);
  if (params_.backend() == Backend::modexp) {
    const auto& mp = params_.modexp_params();
    return SetPoint::residue(pow_mod(x.residue_value(), g.value, mp.p));
  }
  const CurvePoint out = curve_mul(params_.elliptic_params(), g.value, x.affine_value());
  // g in [1, q-1] and x of order q, so out is never the identity.
  return SetPoint::affine(out->x, out->y);
}

GroupScalar GroupAction::compose(GroupScalar g, GroupScalar h) const {
  check_scalar(g);
  check_scalar(h);
  return GroupScalar{mul_mod(g.value, h.value, order())};
}

GroupScalar GroupAction::invert(GroupScalar g) const {
  check_scalar(g);
  return GroupScalar{inv_mod(g.value, order())};
}

GroupScalar GroupAction::product(std::span<const GroupScalar> factors) const {
  GroupScalar acc = identity();
  for (const GroupScalar f : factors) acc = compose(acc, f);
  return acc;
}

GroupScalar GroupAction::random_scalar(Rng& rng) const { return GroupScalar{rng.uniform(1, order() - 1)}; }

GroupScalar GroupAction::random_nonidentity_scalar(Rng& rng) const {
  if (order() < 3) throw ContextError("Z_q* has no non-identity element for q < 3");
  return GroupScalar{rng.uniform(2, order() - 1)};
}

SetPoint GroupAction::random_orbit_point(Rng& rng, const SetPoint& base) const {
  check_point(base);
  return act(random_scalar(rng), base);
}

SetPoint GroupAction::decode_point(std::string_view text) const {
  SetPoint x = SetPoint::decode(text);
  check_point(x);
  return x;
}

}  // namespace ikalab
