#include <gtest/gtest.h>

#include <regex>

#include "densityclust/densityclust.hpp"
#include "support/fixtures.hpp"

using namespace densityclust;

namespace {

ErrorKind kind_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind();
  }
  ADD_FAILURE() << "no error thrown";
  return ErrorKind::internal;
}

std::string message_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.what();
  }
  return "";
}

ClusterDocument document_for(const DensityMap& d, bool pixel_space = false) {
  const auto r = cluster_density_map(d);
  return make_cluster_document(d, r, ClusterParams{}, 1.5, pixel_space, 10);
}

std::size_t count_of(const std::string& hay, const std::string& needle) {
  std::size_t n = 0;
  for (auto pos = hay.find(needle); pos != std::string::npos; pos = hay.find(needle, pos + 1)) ++n;
  return n;
}

}  // namespace

TEST(Csv, ParsesColumnsInAnyOrder) {
  const auto t = parse_csv("text,y,weight,x\nhello,2,0.5,1\n\"a, \"\"b\"\"\nc\",4,1,3\n", {});
  ASSERT_EQ(t.points.size(), 2u);
  EXPECT_EQ(t.points[0].x, 1.0);
  EXPECT_EQ(t.points[0].y, 2.0);
  EXPECT_EQ(t.points[0].weight, 0.5);
  EXPECT_EQ(t.points[1].text, "a, \"b\"\nc");
  EXPECT_TRUE(t.has_text);
}

TEST(Csv, CrlfBomAndBlankLines) {
  const auto t = parse_csv("\xEF\xBB\xBFx,y\r\n1,2\r\n\r\n3,4\r\n", {});
  ASSERT_EQ(t.points.size(), 2u);
  EXPECT_EQ(t.points[1].y, 4.0);
  EXPECT_FALSE(t.has_text);
}

TEST(Csv, CustomColumnNames) {
  ColumnSpec cols;
  cols.x = "umap_1";
  cols.y = "umap_2";
  cols.text = "title";
  const auto t = parse_csv("umap_1,umap_2,title\n0.5,-1e3,abc\n", cols);
  EXPECT_EQ(t.points[0].y, -1000.0);
  EXPECT_EQ(t.points[0].text, "abc");
}

TEST(Csv, MissingColumnIsParameterError) {
  EXPECT_EQ(kind_of([] { parse_csv("a,b\n1,2\n", {}); }), ErrorKind::parameter);
  ColumnSpec cols;
  cols.text = "body";
  EXPECT_EQ(kind_of([&] { parse_csv("x,y\n1,2\n", cols); }), ErrorKind::parameter);
}

TEST(Csv, HeaderOnlyIsNoData) {
  EXPECT_EQ(message_of([] { parse_csv("x,y\n", {}); }), "no data");
  EXPECT_EQ(message_of([] { parse_csv("", {}); }), "no data");
}

TEST(Csv, FewMalformedRowsAreSkipped) {
  std::string csv = "x,y\n";
  for (int i = 0; i < 199; ++i) csv += std::to_string(i) + ",1\n";
  csv += "oops,1\n";
  const auto t = parse_csv(csv, {});
  EXPECT_EQ(t.points.size(), 199u);
  EXPECT_EQ(t.malformed, 1u);
}

TEST(Csv, TooManyMalformedRowsAbortWithRowNumber) {
  std::string csv = "x,y\n";
  for (int i = 0; i < 98; ++i) csv += std::to_string(i) + ",1\n";
  csv += "1,nan\n1,2,3\n";
  try {
    parse_csv(csv, {});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::data);
    EXPECT_NE(std::string(e.what()).find("row 100"), std::string::npos) << e.what();
  }
}

TEST(Jsonl, ParsesPointsAndText) {
  const auto t = parse_jsonl("{\"x\":1,\"y\":2,\"text\":\"hi\"}\n\n{\"x\":3.5,\"y\":-1,\"weight\":2}\n", {});
  ASSERT_EQ(t.points.size(), 2u);
  EXPECT_EQ(t.points[0].text, "hi");
  EXPECT_EQ(t.points[1].weight, 2.0);
  EXPECT_TRUE(t.has_text);
}

TEST(Jsonl, BadLinesCountAsMalformed) {
  EXPECT_EQ(kind_of([] { parse_jsonl("{\"x\":1,\"y\":2}\n{\"x\":1}\n", {}); }), ErrorKind::data);
  EXPECT_EQ(message_of([] { parse_jsonl("\n\n", {}); }), "no data");
}

TEST(Files, MissingFileIsIoError) {
  EXPECT_EQ(kind_of([] { read_file("/nonexistent/points.csv"); }), ErrorKind::io);
  EXPECT_EQ(kind_of([] { write_file("/nonexistent/dir/out.json", "x"); }), ErrorKind::io);
}

TEST(DensityDump, RoundTripsAsFloat32) {
  auto d = fixtures::near_pair();
  const auto bytes = encode_density_dump(d);
  ASSERT_EQ(bytes.size(), 8 + 4 * d.size());
  EXPECT_EQ(static_cast<unsigned char>(bytes[0]), 48u);  // little-endian width
  EXPECT_EQ(static_cast<unsigned char>(bytes[4]), 32u);
  const auto dump = decode_density_dump(bytes);
  EXPECT_EQ(dump.width, 48u);
  EXPECT_EQ(dump.height, 32u);
  for (std::size_t i = 0; i < d.size(); ++i) EXPECT_EQ(dump.values[i], static_cast<float>(d.values[i]));
  EXPECT_EQ(kind_of([&] { decode_density_dump(bytes.substr(0, bytes.size() - 1)); }), ErrorKind::data);
}

TEST(ClusterJson, RoundTripsDataAndPixelSpace) {
  for (bool pixel : {false, true}) {
    auto doc = document_for(fixtures::annulus(), pixel);
    doc.viewport = Viewport{-1.5, 2.25, 10.0, 11.0, 64, 64};
    doc.clusters[0].label = std::vector<std::pair<std::string, double>>{{"ring", 0.25}};
    const auto text = dump_json(to_json(doc));
    const auto back = parse_cluster_document(text);
    EXPECT_EQ(back.viewport, doc.viewport);
    EXPECT_EQ(back.pixel_space, pixel);
    ASSERT_EQ(back.clusters.size(), doc.clusters.size());
    for (std::size_t i = 0; i < doc.clusters.size(); ++i) {
      EXPECT_EQ(back.clusters[i].outer, doc.clusters[i].outer);
      EXPECT_EQ(back.clusters[i].holes, doc.clusters[i].holes);
      EXPECT_EQ(back.clusters[i].rects, doc.clusters[i].rects);
      EXPECT_EQ(back.clusters[i].color, doc.clusters[i].color);
      EXPECT_EQ(back.clusters[i].label, doc.clusters[i].label);
    }
    EXPECT_EQ(dump_json(to_json(back)), text);
  }
}

TEST(ClusterJson, SchemaErrorsNameTheField) {
  const auto good = to_json(document_for(fixtures::far_pair()));
  auto broken = good;
  broken["clusters"][1]["rects"][0][2] = "wide";
  EXPECT_EQ(message_of([&] { cluster_document_from_json(broken); }),
            "schema error at $.clusters[1].rects[0][2]: expected a number");
  broken = good;
  broken["viewport"].erase("height");
  EXPECT_EQ(message_of([&] { cluster_document_from_json(broken); }), "schema error at $.viewport.height: missing field");
  broken = good;
  broken["clusters"][0]["outer"][3] = Json::array({1});
  EXPECT_EQ(message_of([&] { cluster_document_from_json(broken); }),
            "schema error at $.clusters[0].outer[3]: expected [x, y]");
  EXPECT_EQ(message_of([] { parse_cluster_document("{not json"); }), "schema error at $: not valid JSON");
  EXPECT_EQ(kind_of([] { parse_cluster_document("[]"); }), ErrorKind::data);
}

TEST(Render, OneClusterOnePath) {
  const auto svg = render_svg(document_for(fixtures::gaussian_map(40, 30, {{20, 15, 4, 1}})));
  EXPECT_EQ(count_of(svg, "<path "), 1u);
  EXPECT_EQ(svg.rfind("</svg>\n"), svg.size() - 7);
}

TEST(Render, AdjacentClustersGetDistinctFills) {
  ClusterParams p;
  p.merge_distance_px = 0.0;
  p.truncation_ratio = 0.0;
  const auto d = fixtures::random_grid(4);
  const auto r = cluster_density_map(d, p);
  ASSERT_FALSE(r.graph.edges.empty());
  const auto doc = make_cluster_document(d, r, p, 1.0, false, 10);
  const auto svg = render_svg(doc);
  std::map<ClusterId, std::string> fill;
  const std::regex path_re("data-cluster=\"(\\d+)\" fill=\"(#[0-9a-f]{6})\"");
  for (auto it = std::sregex_iterator(svg.begin(), svg.end(), path_re); it != std::sregex_iterator(); ++it)
    fill[ClusterId(std::stoul((*it)[1]))] = (*it)[2];
  ASSERT_EQ(fill.size(), r.graph.nodes.size());
  for (const auto& e : r.graph.edges) EXPECT_NE(fill[e.a], fill[e.b]) << e.a << "-" << e.b;
}

TEST(Render, HolesUseEvenOddSubpaths) {
  const auto svg = render_svg(document_for(fixtures::annulus()));
  EXPECT_EQ(count_of(svg, "<path "), 1u);
  EXPECT_EQ(count_of(svg, "M"), 2u);
  EXPECT_NE(svg.find("fill-rule=\"evenodd\""), std::string::npos);
}

TEST(Render, DensityUnderlayIsEmbeddedPng) {
  const auto d = fixtures::far_pair();
  const auto dump = decode_density_dump(encode_density_dump(d));
  const auto svg = render_svg(document_for(d), &dump);
  EXPECT_NE(svg.find("href=\"data:image/png;base64,iVBORw0KGgo"), std::string::npos);
  DensityDump wrong{3, 3, std::vector<float>(9, 0.0f)};
  EXPECT_EQ(kind_of([&] { render_svg(document_for(d), &wrong); }), ErrorKind::structural);
}

TEST(Render, Base64KnownVectors) {
  EXPECT_EQ(detail::base64(""), "");
  EXPECT_EQ(detail::base64("f"), "Zg==");
  EXPECT_EQ(detail::base64("fo"), "Zm8=");
  EXPECT_EQ(detail::base64("foobar"), "Zm9vYmFy");
}

TEST(Render, PaletteBeyondTenStaysValidHex) {
  EXPECT_EQ(palette_color(0), "#4e79a7");
  const std::regex hex("#[0-9a-f]{6}");
  std::set<std::string> seen;
  for (int i = 0; i < 40; ++i) {
    const auto c = palette_color(i);
    EXPECT_TRUE(std::regex_match(c, hex)) << c;
    seen.insert(c);
  }
  EXPECT_EQ(seen.size(), 40u);
}

TEST(Config, KeysMirrorFlags) {
  RunConfig cfg;
  apply_config_json(cfg, Json::parse(R"({"width":64,"height":32,"merge_distance":3,"connectivity":4,
                                        "bounds":[0,1,2,3],"text_col":"body","top_k":2})"));
  EXPECT_EQ(cfg.width, 64u);
  EXPECT_EQ(cfg.params.merge_distance_px, 3.0);
  EXPECT_EQ(cfg.params.connectivity, Connectivity::four);
  EXPECT_EQ(cfg.columns.text, "body");
  ASSERT_TRUE(cfg.bounds);
  EXPECT_EQ((*cfg.bounds)[3], 3.0);
  EXPECT_EQ(kind_of([&] { apply_config_json(cfg, Json::parse(R"({"widht":5})")); }), ErrorKind::parameter);
  EXPECT_EQ(kind_of([&] { apply_config_json(cfg, Json::parse(R"({"width":"big"})")); }), ErrorKind::parameter);
  EXPECT_EQ(kind_of([&] { apply_config_json(cfg, Json::parse("[1]")); }), ErrorKind::parameter);
}

TEST(Pipeline, PlantedTopicsLabelTheirBlobs) {
  const auto corpus = fixtures::planted_topics(3000, 1);
  RunConfig cfg;
  cfg.width = cfg.height = 200;
  const auto run = cluster_points(corpus.points, cfg);
  ASSERT_EQ(run.document.clusters.size(), 3u);
  const auto labels = label_clusters(run.document, corpus.points, 3);
  ASSERT_EQ(labels.size(), 3u);
  std::set<std::string> tops;
  for (const auto& l : labels) {
    ASSERT_FALSE(l.terms.empty());
    tops.insert(l.terms[0].first);
  }
  EXPECT_EQ(tops, std::set<std::string>(corpus.topics.begin(), corpus.topics.end()));
}

TEST(Pipeline, BenchRowsAreDeterministic) {
  BenchConfig cfg;
  cfg.sizes = {64, 100};
  cfg.repeats = 1;
  const auto a = run_bench(cfg), b = run_bench(cfg);
  ASSERT_EQ(a.size(), 2u);
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i].clusters, b[i].clusters);
    EXPECT_EQ(a[i].cluster_samples.size(), 1u);
    EXPECT_EQ(a[i].components, (a[i].size + 9) / 10);
  }
  const auto j = bench_json(cfg, a);
  EXPECT_EQ(j["rows"].size(), 2u);
  EXPECT_TRUE(j["rows"][0].contains("cluster_ms"));
  cfg.sizes = {32};
  EXPECT_EQ(kind_of([&] { run_bench(cfg); }), ErrorKind::parameter);
}
