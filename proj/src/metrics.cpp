#include "streetonomics/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace streetonomics {

namespace {

bool dated(const StreetRecord& r) { return r.denomination_year.has_value(); }

int decade_start(const StreetRecord& r) { return decade_of(*r.denomination_year).start_year(); }

bool is_female(const StreetRecord& r) { return r.honoree->gender == Gender::female; }

template <typename Pred>
std::optional<std::pair<int, int>> decade_range(std::span<const StreetRecord> records, Pred keep) {
  std::optional<std::pair<int, int>> range;
  for (const auto& r : records) {
    if (!dated(r) || !keep(r)) continue;
    const int d = decade_start(r);
    if (!range) range.emplace(d, d);
    range->first = std::min(range->first, d);
    range->second = std::max(range->second, d);
  }
  return range;
}

template <typename Pred>
DistrictMetric district_shares(std::span<const StreetRecord> records, const CityConfig& city,
                               std::string metric_id, Metric countable, Pred hit,
                               DistrictNormalization norm) {
  DistrictMetric out;
  out.metric_id = std::move(metric_id);
  out.city_id = city.city_id;
  std::map<std::string, Proportion> acc;
  for (const auto& d : city.districts) acc[d.district_id];
  std::int64_t city_total = 0;
  for (const auto& r : records) {
    if (!r.district_id || !is_countable(r, countable)) continue;
    auto it = acc.find(*r.district_id);
    if (it == acc.end()) continue;  // not a configured district
    ++city_total;
    ++it->second.denominator;
    if (hit(r)) ++it->second.numerator;
  }
  if (norm == DistrictNormalization::city_total) {
    for (auto& [_, p] : acc) p.denominator = city_total;
  }
  out.values = std::move(acc);
  return out;
}

template <typename Pred>
Proportion district_share(std::span<const StreetRecord> records, std::string_view district_id,
                          Metric countable, Pred hit, DistrictNormalization norm) {
  Proportion p;
  for (const auto& r : records) {
    if (!r.district_id || !is_countable(r, countable)) continue;
    const bool here = *r.district_id == district_id;
    if (norm == DistrictNormalization::city_total || here) ++p.denominator;
    if (here && hit(r)) ++p.numerator;
  }
  return p;
}

// Merge sort on `v`, returning the number of inversions (pairs out of order).
std::int64_t count_inversions(std::vector<double>& v, std::vector<double>& scratch, std::size_t lo,
                              std::size_t hi) {
  if (hi - lo < 2) return 0;
  const std::size_t mid = lo + (hi - lo) / 2;
  std::int64_t inv = count_inversions(v, scratch, lo, mid) + count_inversions(v, scratch, mid, hi);
  std::size_t i = lo, j = mid, k = lo;
  while (i < mid && j < hi) {
    if (v[j] < v[i]) {
      inv += static_cast<std::int64_t>(mid - i);
      scratch[k++] = v[j++];
    } else {
      scratch[k++] = v[i++];
    }
  }
  while (i < mid) scratch[k++] = v[i++];
  while (j < hi) scratch[k++] = v[j++];
  std::copy(scratch.begin() + static_cast<std::ptrdiff_t>(lo), scratch.begin() + static_cast<std::ptrdiff_t>(hi),
            v.begin() + static_cast<std::ptrdiff_t>(lo));
  return inv;
}

// Sum of t(t-1)/2 over runs of equal values in a sorted sequence.
template <typename Eq>
std::int64_t tie_pairs(std::size_t n, Eq equal) {
  std::int64_t total = 0;
  std::int64_t run = 1;
  for (std::size_t i = 1; i <= n; ++i) {
    if (i < n && equal(i - 1, i)) {
      ++run;
    } else {
      total += run * (run - 1) / 2;
      run = 1;
    }
  }
  return total;
}

}  // namespace

bool is_foreigner(const Honoree& honoree, const CountryCode& home_country) {
  return honoree.country_of_origin && *honoree.country_of_origin != home_country;
}

Proportion f_prop_by_decade(std::span<const StreetRecord> records, Decade decade) {
  Proportion p;
  for (const auto& r : records) {
    if (!dated(r) || !is_countable(r, Metric::gender)) continue;
    if (decade_of(*r.denomination_year) != decade) continue;
    ++p.denominator;
    if (is_female(r)) ++p.numerator;
  }
  return p;
}

DecadeSeries f_prop_series(std::span<const StreetRecord> records, const std::string& city_id) {
  DecadeSeries s{"f_prop_by_decade", city_id, {}};
  const auto range = decade_range(records, [](const auto& r) { return is_countable(r, Metric::gender); });
  if (!range) return s;
  for (int d = range->first; d <= range->second; d += 10) {
    s.values[d] = f_prop_by_decade(records, Decade::from_start(d)).value();
  }
  return s;
}

Proportion f_prop_by_district(std::span<const StreetRecord> records, std::string_view district_id,
                              DistrictNormalization norm) {
  return district_share(records, district_id, Metric::gender, is_female, norm);
}

DistrictMetric f_prop_by_districts(std::span<const StreetRecord> records, const CityConfig& city,
                                   DistrictNormalization norm) {
  return district_shares(records, city, "f_prop_by_district", Metric::gender, is_female, norm);
}

Proportion f_prop_pooled(std::span<const StreetRecord> records) {
  Proportion p;
  for (const auto& r : records) {
    if (!is_countable(r, Metric::gender)) continue;
    ++p.denominator;
    if (is_female(r)) ++p.numerator;
  }
  return p;
}

Proportion for_prop_by_decade(std::span<const StreetRecord> records, Decade decade,
                              const CountryCode& home_country, FormulaMode mode) {
  Proportion p;
  for (const auto& r : records) {
    if (!dated(r) || !is_countable(r, Metric::foreigner)) continue;
    const bool in_decade = decade_of(*r.denomination_year) == decade;
    if (in_decade) ++p.denominator;
    if ((in_decade || mode == FormulaMode::literal) && is_foreigner(*r.honoree, home_country)) {
      ++p.numerator;
    }
  }
  return p;
}

DecadeSeries for_prop_series(std::span<const StreetRecord> records, const CityConfig& city,
                             FormulaMode mode) {
  DecadeSeries s{mode == FormulaMode::literal ? "for_prop_by_decade_literal" : "for_prop_by_decade",
                 city.city_id, {}};
  const auto range = decade_range(records, [](const auto& r) { return is_countable(r, Metric::foreigner); });
  if (!range) return s;
  for (int d = range->first; d <= range->second; d += 10) {
    s.values[d] = for_prop_by_decade(records, Decade::from_start(d), city.home_country, mode).value();
  }
  return s;
}

Proportion for_prop_by_district(std::span<const StreetRecord> records, std::string_view district_id,
                                const CountryCode& home_country, DistrictNormalization norm) {
  return district_share(records, district_id, Metric::foreigner,
                        [&](const StreetRecord& r) { return is_foreigner(*r.honoree, home_country); }, norm);
}

DistrictMetric for_prop_by_districts(std::span<const StreetRecord> records, const CityConfig& city,
                                     DistrictNormalization norm) {
  return district_shares(records, city, "for_prop_by_district", Metric::foreigner,
                         [&](const StreetRecord& r) { return is_foreigner(*r.honoree, city.home_country); },
                         norm);
}

Proportion for_prop_pooled(std::span<const StreetRecord> records, const CountryCode& home_country) {
  Proportion p;
  for (const auto& r : records) {
    if (!is_countable(r, Metric::foreigner)) continue;
    ++p.denominator;
    if (is_foreigner(*r.honoree, home_country)) ++p.numerator;
  }
  return p;
}

FhdResult fhd(std::span<const StreetRecord> records, const std::string& city_id) {
  FhdResult out;
  out.series.metric_id = "fhd";
  out.series.city_id = city_id;
  std::map<int, std::int64_t> counts;
  for (const auto& r : records) {
    if (!r.honoree || r.honoree->gender == Gender::unknown) continue;
    if (!is_countable(r, Metric::fhd)) {
      ++out.excluded_incomplete;
      continue;
    }
    const int first = decade_of(*r.honoree->birth_year).start_year();
    const int last = decade_of(*r.honoree->death_year).start_year();
    if (first > last || *r.honoree->birth_year > *r.honoree->death_year) {
      ++out.skipped_inverted;
      continue;
    }
    for (int d = first; d <= last; d += 10) ++counts[d];
  }
  if (counts.empty()) return out;
  for (int d = counts.begin()->first; d <= counts.rbegin()->first; d += 10) {
    auto it = counts.find(d);
    out.series.values[d] = static_cast<double>(it == counts.end() ? 0 : it->second);
  }
  return out;
}

DecadeSeries denominations_by_decade(std::span<const StreetRecord> records, const std::string& city_id) {
  DecadeSeries s{"denominations_by_decade", city_id, {}};
  std::map<int, std::int64_t> counts;
  std::int64_t total = 0;
  for (const auto& r : records) {
    if (!dated(r)) continue;
    ++counts[decade_start(r)];
    ++total;
  }
  if (counts.empty()) return s;
  for (int d = counts.begin()->first; d <= counts.rbegin()->first; d += 10) {
    auto it = counts.find(d);
    const std::int64_t c = it == counts.end() ? 0 : it->second;
    s.values[d] = static_cast<double>(c) / static_cast<double>(total);
  }
  return s;
}

std::map<OccupationGroup, std::int64_t> OccupationRanking::counts_at(int decade) const {
  std::map<OccupationGroup, std::int64_t> out;
  if (auto it = decades.find(decade); it != decades.end()) {
    for (const auto& g : it->second) out[g.group] = g.count;
  }
  return out;
}

OccupationRanking occupation_ranking(std::span<const StreetRecord> records, RankingMode mode) {
  OccupationRanking out;
  out.mode = mode;
  std::map<int, std::array<std::int64_t, kOccupationGroupCount>> per_decade;
  for (const auto& r : records) {
    if (!dated(r) || !is_countable(r, Metric::occupation)) continue;
    auto& row = per_decade[decade_start(r)];  // value-initialized to zeros
    ++row[static_cast<std::size_t>(*r.honoree->occupation_group)];
  }
  if (per_decade.empty()) return out;

  std::array<std::int64_t, kOccupationGroupCount> running{};
  for (int d = per_decade.begin()->first; d <= per_decade.rbegin()->first; d += 10) {
    std::array<std::int64_t, kOccupationGroupCount> counts{};
    const auto it = per_decade.find(d);
    if (mode == RankingMode::cumulative) {
      if (it != per_decade.end()) {
        for (std::size_t g = 0; g < kOccupationGroupCount; ++g) running[g] += it->second[g];
      }
      counts = running;
    } else if (it != per_decade.end()) {
      counts = it->second;
    }
    std::vector<RankedGroup> ranked;
    for (std::size_t g = 0; g < kOccupationGroupCount; ++g) {
      if (counts[g] > 0) ranked.push_back({kAllOccupationGroups[g], counts[g], 0});
    }
    std::stable_sort(ranked.begin(), ranked.end(),
                     [](const auto& a, const auto& b) { return a.count > b.count; });
    for (std::size_t i = 0; i < ranked.size(); ++i) ranked[i].rank = static_cast<int>(i + 1);
    out.decades[d] = std::move(ranked);
  }
  return out;
}

std::optional<double> kendall_tau(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw std::invalid_argument("kendall_tau: rankings differ in length");
  const std::size_t n = a.size();
  if (n < 2) throw std::invalid_argument("kendall_tau: need at least two items");

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t i, std::size_t j) {
    return a[i] < a[j] || (a[i] == a[j] && b[i] < b[j]);
  });
  std::vector<double> xs(n), ys(n);
  for (std::size_t i = 0; i < n; ++i) {
    xs[i] = a[order[i]];
    ys[i] = b[order[i]];
  }
  const std::int64_t ties_x = tie_pairs(n, [&](std::size_t i, std::size_t j) { return xs[i] == xs[j]; });
  const std::int64_t ties_xy =
      tie_pairs(n, [&](std::size_t i, std::size_t j) { return xs[i] == xs[j] && ys[i] == ys[j]; });

  std::vector<double> scratch(n);
  const std::int64_t swaps = count_inversions(ys, scratch, 0, n);  // ys now sorted
  const std::int64_t ties_y = tie_pairs(n, [&](std::size_t i, std::size_t j) { return ys[i] == ys[j]; });

  const auto total = static_cast<std::int64_t>(n * (n - 1) / 2);
  const double denom = std::sqrt(static_cast<double>(total - ties_x)) *
                       std::sqrt(static_cast<double>(total - ties_y));
  if (denom == 0.0) return std::nullopt;
  const std::int64_t numer = total - ties_x - ties_y + ties_xy - 2 * swaps;
  return static_cast<double>(numer) / denom;
}

std::vector<HalfCenturyStability> half_century_stability(const OccupationRanking& ranking,
                                                         std::span<const int> starts) {
  const auto ranked = [&](int d) {
    auto it = ranking.decades.find(d);
    return it != ranking.decades.end() && !it->second.empty();
  };
  std::vector<HalfCenturyStability> out;
  for (int start : starts) {
    HalfCenturyStability h;
    h.start = start;
    int ranked_decades = 0;
    for (int d = start; d <= start + 50; d += 10) ranked_decades += ranked(d) ? 1 : 0;

    for (int d = start; d < start + 50; d += 10) {
      if (!ranked(d) || !ranked(d + 10)) {
        h.missing_pairs.push_back(d);
        continue;
      }
      auto ca = ranking.counts_at(d);
      auto cb = ranking.counts_at(d + 10);
      std::vector<double> xa, xb;
      for (auto g : kAllOccupationGroups) {
        if (!ca.contains(g) && !cb.contains(g)) continue;
        xa.push_back(static_cast<double>(ca[g]));
        xb.push_back(static_cast<double>(cb[g]));
      }
      std::optional<double> tau;
      if (xa.size() >= 2) tau = kendall_tau(xa, xb);
      if (!tau) {
        h.missing_pairs.push_back(d);
        continue;
      }
      h.pair_tau[d] = *tau;
    }
    if (ranked_decades < 2) {
      h.reason = "fewer than two ranked decades";
    } else if (h.pair_tau.empty()) {
      h.reason = "no consecutive decade pair with a defined tau";
    } else {
      double sum = 0.0;
      for (const auto& [_, t] : h.pair_tau) sum += t;
      h.mean_tau = sum / static_cast<double>(h.pair_tau.size());
    }
    out.push_back(std::move(h));
  }
  return out;
}

std::vector<StreetRecord> apply_start_decade(std::span<const StreetRecord> records,
                                             const CityConfig& city) {
  const Decade start = decade_of(city.start_decade);
  std::vector<StreetRecord> out;
  for (const auto& r : records) {
    if (r.denomination_year && decade_of(*r.denomination_year) < start) continue;
    out.push_back(r);
  }
  return out;
}

}  // namespace streetonomics
