#include "cloudmirror/registry.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numbers>

#include "cloudmirror/error.hpp"
#include "rng.hpp"

namespace cloudmirror {

namespace {

constexpr double kDegToRad = std::numbers::pi / 180.0;

void check_coordinate(double lat, double lon) {
  if (!(lat >= -90.0 && lat <= 90.0) || !(lon >= -180.0 && lon <= 180.0)) {
    throw Error(ErrorCode::kDomain, "coordinate (" + std::to_string(lat) + ", " +
                                        std::to_string(lon) + ") is out of range");
  }
}

std::array<double, 3> unit_vector(double lat, double lon) {
  const double phi = lat * kDegToRad;
  const double lambda = lon * kDegToRad;
  return {std::cos(phi) * std::cos(lambda), std::cos(phi) * std::sin(lambda), std::sin(phi)};
}

bool closer(const ChargerHit& a, const ChargerHit& b) {
  if (a.distance_km != b.distance_km) return a.distance_km < b.distance_km;
  return a.charger->id < b.charger->id;
}

}  // namespace

double haversine_km(double lat1, double lon1, double lat2, double lon2) {
  check_coordinate(lat1, lon1);
  check_coordinate(lat2, lon2);
  const double phi1 = lat1 * kDegToRad;
  const double phi2 = lat2 * kDegToRad;
  const double s_dphi = std::sin((phi2 - phi1) / 2.0);
  const double s_dlambda = std::sin((lon2 - lon1) * kDegToRad / 2.0);
  const double h = s_dphi * s_dphi + std::cos(phi1) * std::cos(phi2) * s_dlambda * s_dlambda;
  return 2.0 * kEarthRadiusKm * std::asin(std::min(1.0, std::sqrt(h)));
}

// k-d tree over unit vectors. Chord length is monotone in great-circle
// distance, so the tree prunes on squared chords and every final decision is
// made on haversine distances of a slightly widened candidate set.
class Registry::SpatialIndex {
 public:
  explicit SpatialIndex(const std::vector<Charger>& chargers) {
    points_.reserve(chargers.size());
    for (const auto& c : chargers) points_.push_back({unit_vector(c.latitude, c.longitude), c.id});
    if (!points_.empty()) build(0, static_cast<std::uint32_t>(points_.size()));
  }

  double nearest_chord2(const std::array<double, 3>& q) const {
    double best = std::numeric_limits<double>::infinity();
    nearest(0, q, best);
    return best;
  }

  void within(const std::array<double, 3>& q, double chord2, std::vector<std::size_t>& out) const {
    if (!nodes_.empty()) range(0, q, chord2, out);
  }

 private:
  struct Point {
    std::array<double, 3> v;
    std::size_t id;
  };
  struct Node {
    std::uint32_t lo, hi;
    int axis = -1;  // -1 marks a leaf
    double split = 0.0;
    int left = -1, right = -1;
  };
  static constexpr std::uint32_t kLeafSize = 8;

  static double chord2(const std::array<double, 3>& a, const std::array<double, 3>& b) {
    const double dx = a[0] - b[0], dy = a[1] - b[1], dz = a[2] - b[2];
    return dx * dx + dy * dy + dz * dz;
  }

  int build(std::uint32_t lo, std::uint32_t hi) {
    const int idx = static_cast<int>(nodes_.size());
    nodes_.push_back({lo, hi});
    if (hi - lo <= kLeafSize) return idx;
    std::array<double, 3> mn{1e9, 1e9, 1e9}, mx{-1e9, -1e9, -1e9};
    for (std::uint32_t i = lo; i < hi; ++i) {
      for (int a = 0; a < 3; ++a) {
        mn[a] = std::min(mn[a], points_[i].v[a]);
        mx[a] = std::max(mx[a], points_[i].v[a]);
      }
    }
    int axis = 0;
    for (int a = 1; a < 3; ++a) {
      if (mx[a] - mn[a] > mx[axis] - mn[axis]) axis = a;
    }
    const std::uint32_t mid = lo + (hi - lo) / 2;
    std::nth_element(points_.begin() + lo, points_.begin() + mid, points_.begin() + hi,
                     [axis](const Point& a, const Point& b) { return a.v[axis] < b.v[axis]; });
    const double split = points_[mid].v[axis];
    const int left = build(lo, mid);
    const int right = build(mid, hi);
    nodes_[idx].axis = axis;
    nodes_[idx].split = split;
    nodes_[idx].left = left;
    nodes_[idx].right = right;
    return idx;
  }

  void nearest(int idx, const std::array<double, 3>& q, double& best) const {
    const Node& n = nodes_[idx];
    if (n.axis < 0) {
      for (std::uint32_t i = n.lo; i < n.hi; ++i) best = std::min(best, chord2(q, points_[i].v));
      return;
    }
    const double diff = q[n.axis] - n.split;
    const int near = diff < 0 ? n.left : n.right;
    const int far = diff < 0 ? n.right : n.left;
    nearest(near, q, best);
    if (diff * diff <= best) nearest(far, q, best);
  }

  void range(int idx, const std::array<double, 3>& q, double r2,
             std::vector<std::size_t>& out) const {
    const Node& n = nodes_[idx];
    if (n.axis < 0) {
      for (std::uint32_t i = n.lo; i < n.hi; ++i) {
        if (chord2(q, points_[i].v) <= r2) out.push_back(points_[i].id);
      }
      return;
    }
    const double diff = q[n.axis] - n.split;
    const int near = diff < 0 ? n.left : n.right;
    const int far = diff < 0 ? n.right : n.left;
    range(near, q, r2, out);
    if (diff * diff <= r2) range(far, q, r2, out);
  }

  std::vector<Point> points_;
  std::vector<Node> nodes_;
};

namespace {

// Widening applied to chord bounds before the exact haversine pass.
double widen(double chord2) { return chord2 * (1.0 + 1e-9) + 1e-15; }

}  // namespace

Registry::Registry(std::vector<Charger> chargers) : chargers_(std::move(chargers)) {
  for (std::size_t i = 0; i < chargers_.size(); ++i) {
    chargers_[i].id = i;
    check_coordinate(chargers_[i].latitude, chargers_[i].longitude);
  }
  index_ = std::make_unique<SpatialIndex>(chargers_);
}

Registry::Registry() = default;
Registry::~Registry() = default;
Registry::Registry(Registry&&) noexcept = default;
Registry& Registry::operator=(Registry&&) noexcept = default;

const Charger& Registry::get_charger(long long id) const {
  if (id < 0 || static_cast<unsigned long long>(id) >= chargers_.size()) {
    throw Error(ErrorCode::kNotFound, "no charger with id " + std::to_string(id) + " (count " +
                                          std::to_string(chargers_.size()) + ")");
  }
  return chargers_[static_cast<std::size_t>(id)];
}

ChargerHit Registry::closest_charger(double lat, double lon) const {
  check_coordinate(lat, lon);
  if (chargers_.empty()) throw Error(ErrorCode::kNotFound, "registry is empty");
  const auto q = unit_vector(lat, lon);
  std::vector<std::size_t> candidates;
  index_->within(q, widen(index_->nearest_chord2(q)), candidates);
  ChargerHit best;
  for (std::size_t id : candidates) {
    const Charger& c = chargers_[id];
    ChargerHit hit{&c, haversine_km(lat, lon, c.latitude, c.longitude)};
    if (!best.charger || closer(hit, best)) best = hit;
  }
  return best;
}

std::vector<ChargerHit> Registry::chargers_in_range(double lat, double lon,
                                                    double radius_km) const {
  check_coordinate(lat, lon);
  if (!(radius_km >= 0.0)) throw Error(ErrorCode::kDomain, "radius must be non-negative");
  std::vector<std::size_t> candidates;
  const double angle = radius_km / kEarthRadiusKm;
  if (angle >= std::numbers::pi || !index_) {
    for (const auto& c : chargers_) candidates.push_back(c.id);
  } else {
    const double chord = 2.0 * std::sin(angle / 2.0);
    index_->within(unit_vector(lat, lon), widen(chord * chord), candidates);
  }
  std::vector<ChargerHit> hits;
  for (std::size_t id : candidates) {
    const Charger& c = chargers_[id];
    const double d = haversine_km(lat, lon, c.latitude, c.longitude);
    if (d <= radius_km) hits.push_back({&c, d});
  }
  std::sort(hits.begin(), hits.end(), closer);
  return hits;
}

BoundingBox Registry::bounds() const {
  if (chargers_.empty()) throw Error(ErrorCode::kNotFound, "registry is empty");
  BoundingBox b{90.0, -90.0, 180.0, -180.0};
  for (const auto& c : chargers_) {
    b.min_lat = std::min(b.min_lat, c.latitude);
    b.max_lat = std::max(b.max_lat, c.latitude);
    b.min_lon = std::min(b.min_lon, c.longitude);
    b.max_lon = std::max(b.max_lon, c.longitude);
  }
  return b;
}

namespace {

std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = s.find(sep, start);
    out.push_back(s.substr(start, pos == std::string_view::npos ? pos : pos - start));
    if (pos == std::string_view::npos) return out;
    start = pos + 1;
  }
}

double parse_double(std::string_view field, const std::string& what, const std::string& where) {
  double v = 0.0;
  const auto* end = field.data() + field.size();
  auto [ptr, ec] = std::from_chars(field.data(), end, v);
  if (field.empty() || ec != std::errc() || ptr != end || !std::isfinite(v)) {
    throw Error(ErrorCode::kParse, where + ": invalid " + what + " '" + std::string(field) + "'");
  }
  return v;
}

std::string format_double(double v) {
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

}  // namespace

Registry load_registry(std::string_view csv) {
  auto lines = split(csv, '\n');
  for (auto& l : lines) {
    if (!l.empty() && l.back() == '\r') l.remove_suffix(1);
  }
  if (lines.empty() || lines.front() != kRegistryHeader) {
    throw Error(ErrorCode::kParse, "charger table: missing or unexpected header");
  }
  std::vector<Charger> chargers;
  std::size_t row = 0;
  for (std::size_t li = 1; li < lines.size(); ++li) {
    if (lines[li].empty()) continue;
    ++row;
    const std::string where = "row " + std::to_string(row) + " (line " + std::to_string(li + 1) + ")";
    const auto f = split(lines[li], ';');
    if (f.size() != 12) {
      throw Error(ErrorCode::kParse, where + ": expected 12 fields, found " + std::to_string(f.size()));
    }
    Charger c;
    c.operator_name = f[0];
    c.address = {std::string(f[1]), std::string(f[2]), std::string(f[3]),
                 std::string(f[4]), std::string(f[5]), std::string(f[6])};
    c.latitude = parse_double(f[7], "latitude", where);
    c.longitude = parse_double(f[8], "longitude", where);
    if (c.latitude < -90.0 || c.latitude > 90.0 || c.longitude < -180.0 || c.longitude > 180.0) {
      throw Error(ErrorCode::kValidation, where + ": coordinate out of range");
    }
    int points = 0;
    {
      auto [ptr, ec] = std::from_chars(f[9].data(), f[9].data() + f[9].size(), points);
      if (f[9].empty() || ec != std::errc() || ptr != f[9].data() + f[9].size() || points < 1) {
        throw Error(ErrorCode::kParse, where + ": invalid points '" + std::string(f[9]) + "'");
      }
    }
    const auto plugs = split(f[10], ',');
    const auto powers = split(f[11], ',');
    if (plugs.size() != static_cast<std::size_t>(points) ||
        powers.size() != static_cast<std::size_t>(points)) {
      throw Error(ErrorCode::kParse, where + ": plug_types and power_kw must list " +
                                         std::to_string(points) + " entries");
    }
    for (int p = 0; p < points; ++p) {
      const double kw = parse_double(powers[p], "power", where);
      if (!(kw > 0.0)) throw Error(ErrorCode::kValidation, where + ": power must be positive");
      c.charge_points.push_back({std::string(plugs[p]), kw});
    }
    chargers.push_back(std::move(c));
  }
  return Registry(std::move(chargers));
}

std::string write_registry_csv(const std::vector<Charger>& chargers) {
  std::string out = kRegistryHeader;
  out += '\n';
  for (const auto& c : chargers) {
    const auto& a = c.address;
    out += c.operator_name + ';' + a.street + ';' + a.house_number + ';' + a.zip + ';' + a.city +
           ';' + a.state + ';' + a.district + ';' + format_double(c.latitude) + ';' +
           format_double(c.longitude) + ';' + std::to_string(c.charge_points.size()) + ';';
    for (std::size_t i = 0; i < c.charge_points.size(); ++i) {
      out += (i ? "," : "") + c.charge_points[i].plug_type;
    }
    out += ';';
    for (std::size_t i = 0; i < c.charge_points.size(); ++i) {
      out += (i ? "," : "") + format_double(c.charge_points[i].power_kw);
    }
    out += '\n';
  }
  return out;
}

namespace {

struct City {
  const char* name;
  const char* state;
  const char* district;
  const char* zip_prefix;
  double lat, lon;
};

constexpr City kCities[] = {
    {"Stuttgart", "Baden-Wuerttemberg", "Stuttgart", "70", 48.7758, 9.1829},
    {"Muenchen", "Bayern", "Muenchen", "80", 48.1374, 11.5755},
    {"Berlin", "Berlin", "Berlin", "10", 52.5200, 13.4050},
    {"Hamburg", "Hamburg", "Hamburg", "20", 53.5511, 9.9937},
    {"Koeln", "Nordrhein-Westfalen", "Koeln", "50", 50.9375, 6.9603},
    {"Frankfurt am Main", "Hessen", "Frankfurt am Main", "60", 50.1109, 8.6821},
    {"Leipzig", "Sachsen", "Leipzig", "04", 51.3397, 12.3731},
    {"Hannover", "Niedersachsen", "Region Hannover", "30", 52.3759, 9.7320},
    {"Nuernberg", "Bayern", "Nuernberg", "90", 49.4521, 11.0767},
    {"Karlsruhe", "Baden-Wuerttemberg", "Karlsruhe", "76", 49.0069, 8.4037},
    {"Dresden", "Sachsen", "Dresden", "01", 51.0504, 13.7373},
    {"Bremen", "Bremen", "Bremen", "28", 53.0793, 8.8017},
};

constexpr const char* kOperators[] = {"EnBW mobility+", "Stadtwerke", "IONITY", "Allego",
                                      "EWE Go", "Tesla", "E.ON Drive", "Mainova"};
constexpr const char* kStreets[] = {"Hauptstrasse", "Bahnhofstrasse", "Schulstrasse",
                                    "Gartenstrasse", "Dorfstrasse", "Industriestrasse",
                                    "Marktplatz", "Ringstrasse"};
constexpr const char* kPlugs[] = {"Type2", "CCS", "CHAdeMO", "Schuko"};
constexpr double kPowers[] = {11.0, 22.0, 50.0, 150.0, 300.0};

template <typename T, std::size_t N>
const T& pick(Rng& rng, const T (&arr)[N]) {
  return arr[rng.below(N)];
}

}  // namespace

std::string generate_fixture_csv(std::size_t rows, std::uint64_t seed) {
  Rng rng(seed);
  std::string out = kRegistryHeader;
  out += '\n';
  std::string prev_coords;
  char buf[64];
  for (std::size_t r = 0; r < rows; ++r) {
    const City& city = pick(rng, kCities);
    std::string coords;
    if (!prev_coords.empty() && rng.uniform() < 0.03) {
      coords = prev_coords;  // co-located stations exercise the id tie-break
    } else if (rng.uniform() < 0.1) {
      std::snprintf(buf, sizeof buf, "%.6f;%.6f", rng.uniform(47.3, 55.0), rng.uniform(5.9, 15.0));
      coords = buf;
    } else {
      // Sum of uniforms: a cheap bell-shaped scatter of roughly 10 km.
      const double dlat = (rng.uniform() + rng.uniform() + rng.uniform() - 1.5) * 0.12;
      const double dlon = (rng.uniform() + rng.uniform() + rng.uniform() - 1.5) * 0.18;
      std::snprintf(buf, sizeof buf, "%.6f;%.6f", city.lat + dlat, city.lon + dlon);
      coords = buf;
    }
    prev_coords = coords;
    const int points = 1 + static_cast<int>(rng.below(4));
    std::string plugs, powers;
    for (int p = 0; p < points; ++p) {
      plugs += (p ? "," : "") + std::string(pick(rng, kPlugs));
      powers += (p ? "," : "") + format_double(pick(rng, kPowers));
    }
    std::snprintf(buf, sizeof buf, "%s%03d", city.zip_prefix, static_cast<int>(rng.below(1000)));
    const std::string zip = buf;
    out += std::string(pick(rng, kOperators)) + ';' + pick(rng, kStreets) + ';' +
           std::to_string(1 + rng.below(120)) + ';' + zip + ';' + city.name + ';' + city.state +
           ';' + city.district + ';' + coords + ';' + std::to_string(points) + ';' + plugs + ';' +
           powers + '\n';
  }
  return out;
}

}  // namespace cloudmirror
