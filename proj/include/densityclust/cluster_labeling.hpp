#pragma once

// Cluster labels from a text column (class-based TF-IDF) and SQL range
// predicates that select exactly the points covered by a cluster's rectangles.

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "cluster_engine.hpp"
#include "error.hpp"
#include "grid_density.hpp"
#include "region_geometry.hpp"

namespace densityclust {

// Shipped as data/stopwords.txt as well; the two lists are compared in tests.
inline constexpr std::array kStopwords = {
    "a", "about", "above", "after", "again", "against", "all", "also", "am", "an", "and", "any",
    "are", "as", "at", "be", "because", "been", "before", "being", "below", "between", "both",
    "but", "by", "can", "could", "did", "do", "does", "doing", "down", "during", "each", "few",
    "for", "from", "further", "get", "got", "had", "has", "have", "having", "he", "her", "here",
    "hers", "herself", "him", "himself", "his", "how", "i", "if", "in", "into", "is", "it", "its",
    "itself", "just", "like", "may", "me", "might", "more", "most", "must", "my", "myself", "no",
    "nor", "not", "now", "of", "off", "on", "once", "only", "or", "other", "our", "ours",
    "ourselves", "out", "over", "own", "same", "shall", "she", "should", "so", "some", "such",
    "than", "that", "the", "their", "theirs", "them", "themselves", "then", "there", "these",
    "they", "this", "those", "through", "to", "too", "under", "until", "up", "us", "very", "was",
    "we", "were", "what", "when", "where", "which", "while", "who", "whom", "why", "will", "with",
    "would", "you", "your", "yours", "yourself", "yourselves"
};

inline bool is_stopword(std::string_view token) {
  return std::binary_search(kStopwords.begin(), kStopwords.end(), token,
                            [](std::string_view l, std::string_view r) { return l < r; });
}

// ASCII case-folding; anything other than [A-Za-z0-9] separates tokens. Tokens
// shorter than two characters and stopwords are dropped.
inline std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> tokens;
  std::string cur;
  auto flush = [&] {
    if (cur.size() >= 2 && !is_stopword(cur)) tokens.push_back(cur);
    cur.clear();
  };
  for (char ch : text) {
    const auto c = static_cast<unsigned char>(ch);
    if (c >= 'A' && c <= 'Z') {
      cur.push_back(static_cast<char>(c - 'A' + 'a'));
    } else if ((c >= 'a' && c <= 'z') || (c >= '0' && c <= '9')) {
      cur.push_back(static_cast<char>(c));
    } else {
      flush();
    }
  }
  flush();
  return tokens;
}

using Assignment = std::map<ClusterId, std::vector<std::size_t>>;

// A point belongs to a cluster when it falls inside one of the cluster's
// data-space rectangles (half-open). Clusters without members still appear.
inline Assignment assign_documents(std::span<const Point2D> points, std::span<const ClusterShape> shapes,
                                   const Viewport& viewport) {
  viewport.validate();
  Assignment result;
  struct Entry {
    Rect rect;
    ClusterId id;
  };
  // Each rectangle is registered in every pixel bucket it overlaps, widened by
  // one bucket so rounding in the bucket lookup cannot miss it.
  const std::uint32_t w = viewport.width, h = viewport.height;
  std::vector<std::vector<std::uint32_t>> buckets(viewport.pixel_count());
  std::vector<Entry> entries;
  for (const auto& shape : shapes) {
    result[shape.cluster_id];
    for (const auto& r : shape.rects) {
      const auto idx = static_cast<std::uint32_t>(entries.size());
      entries.push_back({r, shape.cluster_id});
      const Vec2 lo = data_to_pixel({r.x0, r.y0}, viewport), hi = data_to_pixel({r.x1, r.y1}, viewport);
      auto clamp = [](double v, std::uint32_t n) {
        if (!(v > 0.0)) return std::int64_t{0};
        return std::min<std::int64_t>(static_cast<std::int64_t>(v), n);
      };
      const auto bx0 = std::max<std::int64_t>(clamp(std::floor(lo.x), w) - 1, 0);
      const auto by0 = std::max<std::int64_t>(clamp(std::floor(lo.y), h) - 1, 0);
      const auto bx1 = std::min<std::int64_t>(clamp(std::ceil(hi.x), w) + 1, w);
      const auto by1 = std::min<std::int64_t>(clamp(std::ceil(hi.y), h) + 1, h);
      for (auto by = by0; by < by1; ++by)
        for (auto bx = bx0; bx < bx1; ++bx) buckets[std::size_t(by) * w + std::size_t(bx)].push_back(idx);
    }
  }
  if (entries.empty()) return result;

  for (std::size_t i = 0; i < points.size(); ++i) {
    const auto& p = points[i];
    if (!std::isfinite(p.x) || !std::isfinite(p.y)) continue;
    const Vec2 px = data_to_pixel({p.x, p.y}, viewport);
    if (px.x < -1.0 || px.y < -1.0 || px.x > w + 1.0 || px.y > h + 1.0) continue;
    const auto bx = std::clamp<std::int64_t>(static_cast<std::int64_t>(std::floor(px.x)), 0, w - 1);
    const auto by = std::clamp<std::int64_t>(static_cast<std::int64_t>(std::floor(px.y)), 0, h - 1);
    for (auto e : buckets[std::size_t(by) * w + std::size_t(bx)]) {
      if (entries[e].rect.contains(p.x, p.y)) {
        result[entries[e].id].push_back(i);
        break;
      }
    }
  }
  return result;
}

struct TermStats {
  std::string term;
  std::map<ClusterId, std::size_t> per_cluster_count;
  std::size_t corpus_count = 0;
};

// Token counts per term over all documents, split by cluster.
inline std::vector<TermStats> collect_term_stats(const Assignment& assignment,
                                                 std::span<const std::string> documents) {
  std::vector<ClusterId> owner(documents.size(), kBackground);
  for (const auto& [id, members] : assignment)
    for (auto doc : members)
      if (doc < owner.size()) owner[doc] = id;

  std::unordered_map<std::string, std::size_t> index;
  std::vector<TermStats> stats;
  for (std::size_t doc = 0; doc < documents.size(); ++doc) {
    for (auto& token : tokenize(documents[doc])) {
      auto [it, fresh] = index.try_emplace(token, stats.size());
      if (fresh) stats.push_back(TermStats{std::move(token), {}, 0});
      auto& s = stats[it->second];
      ++s.corpus_count;
      if (owner[doc] != kBackground) ++s.per_cluster_count[owner[doc]];
    }
  }
  std::sort(stats.begin(), stats.end(), [](const TermStats& l, const TermStats& r) { return l.term < r.term; });
  return stats;
}

struct LabelResult {
  ClusterId cluster_id = kBackground;
  std::vector<std::pair<std::string, double>> top_terms;
};

// score(t, c) = tf(t, c) * log(1 + A / corpus_count(t)), where tf is the share
// of c's tokens that are t and A is the mean token count per cluster. The k best
// terms are kept; equal scores are ordered by term.
inline std::vector<LabelResult> ctfidf_labels(const Assignment& assignment, std::span<const std::string> documents,
                                              std::size_t k) {
  if (k < 1) throw Error(ErrorKind::parameter, "k must be >= 1");
  const auto stats = collect_term_stats(assignment, documents);

  std::map<ClusterId, std::size_t> tokens_in;
  for (const auto& [id, _] : assignment) tokens_in[id] = 0;
  std::size_t clustered_tokens = 0;
  for (const auto& s : stats)
    for (const auto& [id, count] : s.per_cluster_count) {
      tokens_in[id] += count;
      clustered_tokens += count;
    }
  const double mean_tokens = assignment.empty() ? 0.0 : double(clustered_tokens) / double(assignment.size());

  std::map<ClusterId, std::vector<std::pair<std::string, double>>> scored;
  for (const auto& s : stats)
    for (const auto& [id, count] : s.per_cluster_count) {
      const double tf = double(count) / double(tokens_in[id]);
      scored[id].emplace_back(s.term, tf * std::log1p(mean_tokens / double(s.corpus_count)));
    }

  std::vector<LabelResult> labels;
  for (const auto& [id, _] : assignment) {
    LabelResult label{id, {}};
    auto& terms = scored[id];
    std::sort(terms.begin(), terms.end(), [](const auto& l, const auto& r) {
      return l.second > r.second || (l.second == r.second && l.first < r.first);
    });
    if (terms.size() > k) terms.resize(k);
    label.top_terms = std::move(terms);
    labels.push_back(std::move(label));
  }
  return labels;
}

// Shortest decimal text that parses back to exactly the same double.
inline std::string format_number(double v) {
  if (!std::isfinite(v)) throw Error(ErrorKind::parameter, "cannot format a non-finite number");
  if (v == 0.0) return "0";
  std::array<char, 32> buf{};
  auto [end, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  if (ec != std::errc{}) throw Error(ErrorKind::internal, "number formatting failed");
  return std::string(buf.data(), end);
}

inline bool is_sql_identifier(std::string_view name) {
  if (name.empty()) return false;
  auto alpha = [](char c) { return (c >= 'A' && c <= 'Z') || (c >= 'a' && c <= 'z') || c == '_'; };
  if (!alpha(name.front())) return false;
  return std::all_of(name.begin(), name.end(), [&](char c) { return alpha(c) || (c >= '0' && c <= '9'); });
}

// One parenthesized conjunct per rectangle, joined by OR.
inline std::string emit_sql_predicate(const ClusterShape& shape, std::string_view x_column, std::string_view y_column) {
  if (!is_sql_identifier(x_column) || !is_sql_identifier(y_column))
    throw Error(ErrorKind::parameter, "column names must match [A-Za-z_][A-Za-z0-9_]*");
  if (shape.rects.empty()) throw Error(ErrorKind::parameter, "cluster has no rectangles");
  std::string sql;
  for (const auto& r : shape.rects) {
    if (!sql.empty()) sql += " OR ";
    sql += '(';
    sql.append(x_column).append(" >= ").append(format_number(r.x0));
    sql.append(" AND ").append(x_column).append(" < ").append(format_number(r.x1));
    sql.append(" AND ").append(y_column).append(" >= ").append(format_number(r.y0));
    sql.append(" AND ").append(y_column).append(" < ").append(format_number(r.y1));
    sql += ')';
  }
  return sql;
}

}  // namespace densityclust
