#include <gtest/gtest.h>

#include <httplib.h>
#include <json.hpp>

#include <thread>

#include "softbokeh/image_io.hpp"
#include "softbokeh/service.hpp"
#include "softbokeh/synth.hpp"
#include "test_util.hpp"

using namespace softbokeh;
using nlohmann::json;

namespace {

std::string bytes(const std::vector<std::uint8_t>& v) { return {v.begin(), v.end()}; }

PlanarImage decode(const std::string& body, ImageKind kind) {
    return decode_image({reinterpret_cast<const std::uint8_t*>(body.data()), body.size()}, kind);
}

struct Upload {
    std::string image;
    std::string disparity;
    SyntheticScene scene;
};

Upload upload_for(const SceneRecipe& recipe, int w, int h, std::uint64_t seed) {
    SyntheticScene scene = make_scene(recipe, w, h, seed);
    return {bytes(encode_png8(scene.image)), bytes(encode_pfm(scene.disparity)), std::move(scene)};
}

std::string create(PreviewService& service, const Upload& u) {
    const HttpResponse r = service.create_session(u.image, u.disparity);
    EXPECT_EQ(r.status, 201) << r.body;
    return json::parse(r.body).at("id").get<std::string>();
}

double region_energy(const PlanarImage& img, int x0, int x1) {
    PlanarImage part(x1 - x0, img.height(), img.channels());
    for (int c = 0; c < img.channels(); ++c)
        for (int y = 0; y < img.height(); ++y)
            for (int x = x0; x < x1; ++x) part.at(c, x - x0, y) = img.at(c, x, y);
    return softbokeh::testing::interior_laplacian_energy(part, 2);
}

}  // namespace

TEST(Service, CreateSessionContract) {
    PreviewService service;
    const Upload u = upload_for(SceneRecipe::flat(0.4), 32, 24, 1);
    const HttpResponse ok = service.create_session(u.image, u.disparity);
    EXPECT_EQ(ok.status, 201);
    EXPECT_EQ(ok.content_type, "application/json");
    const std::string id = json::parse(ok.body).at("id");
    EXPECT_FALSE(id.empty());
    const std::string second = create(service, u);
    EXPECT_NE(second, id);
    EXPECT_EQ(service.session_count(), 2u);

    const Upload other = upload_for(SceneRecipe::flat(0.4), 30, 24, 1);
    const HttpResponse mismatch = service.create_session(u.image, other.disparity);
    EXPECT_EQ(mismatch.status, 422);
    EXPECT_NE(json::parse(mismatch.body).at("error").get<std::string>().find("mismatch"), std::string::npos);
    EXPECT_EQ(service.create_session("not a png", u.disparity).status, 400);
    EXPECT_EQ(service.create_session(u.image, "junk").status, 400);

    PlanarImage bad_disp = u.scene.disparity;
    bad_disp.at(0, 0, 0) = 2.0f;
    EXPECT_EQ(service.create_session(u.image, bytes(encode_pfm(bad_disp))).status, 422);
}

TEST(Service, RenderValidation) {
    PreviewService service;
    const std::string id = create(service, upload_for(SceneRecipe::flat(0.4), 16, 16, 2));
    EXPECT_EQ(service.render("missing", R"({"focal":0.5})").status, 404);
    EXPECT_EQ(service.render(id, "{not json").status, 400);
    EXPECT_EQ(service.render(id, R"({})").status, 422);
    EXPECT_EQ(service.render(id, R"({"focal":1.5})").status, 422);
    EXPECT_EQ(service.render(id, R"({"focal":0.5,"blur_scale":0})").status, 422);
    EXPECT_EQ(service.render(id, R"({"focal":0.5,"blur_scale":4.5})").status, 422);
    EXPECT_EQ(service.render(id, R"({"focal":0.5,"preview":"yes"})").status, 422);
    EXPECT_EQ(service.render(id, R"({"focal":0.5,"blur_scale":4})").status, 200);
}

TEST(Service, FocalAtFlatDisparityReturnsUpload) {
    PreviewService service;
    const Upload u = upload_for(SceneRecipe::flat(0.4), 48, 32, 3);
    const std::string id = create(service, u);
    const HttpResponse r = service.render(id, R"({"focal":0.4})");
    ASSERT_EQ(r.status, 200);
    EXPECT_EQ(r.content_type, "image/png");
    const PlanarImage uploaded = decode(u.image, ImageKind::rgb8);
    EXPECT_LE(softbokeh::testing::max_abs_diff(decode(r.body, ImageKind::rgb8), uploaded), 1.0 / 255.0 + 1e-6);
}

TEST(Service, FocalSweepFlipsBlurredSide) {
    PreviewService service;
    const std::string id = create(service, upload_for(SceneRecipe::two_plane(0.0, 1.0, SceneShape::half), 96, 48, 4));
    const PlanarImage near = decode(service.render(id, R"({"focal":0.0,"preview":true})").body, ImageKind::rgb8);
    const PlanarImage far = decode(service.render(id, R"({"focal":1.0,"preview":true})").body, ImageKind::rgb8);
    EXPECT_GT(region_energy(near, 0, 40), region_energy(near, 56, 96));
    EXPECT_LT(region_energy(far, 0, 40), region_energy(far, 56, 96));
}

TEST(Service, LargerBlurScaleLowersBackgroundEnergy) {
    PreviewService service;
    const std::string id = create(service, upload_for(SceneRecipe::two_plane(0.0, 0.8, SceneShape::half), 128, 64, 5));
    const PlanarImage s1 = decode(service.render(id, R"({"focal":0.0,"blur_scale":1})").body, ImageKind::rgb8);
    const PlanarImage s2 = decode(service.render(id, R"({"focal":0.0,"blur_scale":2})").body, ImageKind::rgb8);
    EXPECT_LT(region_energy(s2, 80, 128), region_energy(s1, 80, 128));
}

TEST(Service, RepeatedRequestsAreByteIdentical) {
    PreviewService service;
    const std::string id = create(service, upload_for(SceneRecipe::two_plane(0.2, 0.9, SceneShape::disk), 40, 40, 6));
    const std::string body = R"({"focal":0.2,"blur_scale":1.5})";
    EXPECT_EQ(service.render(id, body).body, service.render(id, body).body);
    EXPECT_EQ(service.defocus(id, "0.3").body, service.defocus(id, "0.3").body);
}

TEST(Service, DefocusEndpoint) {
    PreviewService service;
    const std::string flat = create(service, upload_for(SceneRecipe::flat(0.6), 20, 10, 7));
    const HttpResponse zero = service.defocus(flat, "0.6");
    ASSERT_EQ(zero.status, 200);
    EXPECT_TRUE(softbokeh::testing::all_near(decode_disparity({reinterpret_cast<const std::uint8_t*>(zero.body.data()),
                                                               zero.body.size()}),
                                             0.0, 0.0));
    const std::string ramp = create(service, upload_for(SceneRecipe::ramp(), 30, 6, 7));
    const HttpResponse r = service.defocus(ramp, "0");
    const PlanarImage d = decode_disparity({reinterpret_cast<const std::uint8_t*>(r.body.data()), r.body.size()});
    for (int x = 1; x < 30; ++x) EXPECT_GT(d.at(0, x, 3), d.at(0, x - 1, 3));
    EXPECT_EQ(service.defocus("nope", "0.5").status, 404);
    EXPECT_EQ(service.defocus(flat, "abc").status, 422);
    EXPECT_EQ(service.defocus(flat, "-0.1").status, 422);
}

TEST(Service, LruEvictsOldestSession) {
    ServiceOptions options;
    options.max_sessions = 2;
    PreviewService service(options);
    const Upload u = upload_for(SceneRecipe::flat(0.5), 8, 8, 8);
    const std::string a = create(service, u);
    const std::string b = create(service, u);
    EXPECT_EQ(service.defocus(a, "0.5").status, 200);  // touch a so b is the oldest
    const std::string c = create(service, u);
    EXPECT_EQ(service.session_count(), 2u);
    EXPECT_TRUE(service.has_session(a));
    EXPECT_FALSE(service.has_session(b));
    EXPECT_TRUE(service.has_session(c));
}

TEST(Service, ConcurrentRendersAreIsolated) {
    PreviewService service;
    std::vector<std::string> ids;
    std::vector<std::string> expected;
    for (std::uint64_t s = 0; s < 3; ++s) {
        ids.push_back(create(service, upload_for(SceneRecipe::two_plane(0.0, 0.7, SceneShape::disk), 40, 40, 10 + s)));
        expected.push_back(service.render(ids.back(), R"({"focal":0.0,"preview":true})").body);
    }
    std::vector<std::string> got(6);
    std::vector<std::thread> threads;
    for (std::size_t t = 0; t < got.size(); ++t)
        threads.emplace_back([&, t] { got[t] = service.render(ids[t % 3], R"({"focal":0.0,"preview":true})").body; });
    for (auto& th : threads) th.join();
    for (std::size_t t = 0; t < got.size(); ++t) EXPECT_EQ(got[t], expected[t % 3]);
}

TEST(Server, HttpRoundTrip) {
    PreviewService service;
    PreviewServer server(service);
    const int port = server.bind("127.0.0.1", 0);
    ASSERT_GT(port, 0);
    server.start();

    httplib::Client client("127.0.0.1", port);
    const Upload u = upload_for(SceneRecipe::flat(0.3), 24, 16, 9);
    httplib::MultipartFormDataItems items{{"image", u.image, "image.png", "image/png"},
                                          {"disparity", u.disparity, "disparity.pfm", "application/octet-stream"}};
    auto created = client.Post("/sessions", items);
    ASSERT_TRUE(created);
    EXPECT_EQ(created->status, 201);
    EXPECT_EQ(created->get_header_value("Access-Control-Allow-Origin"), "*");
    const std::string id = json::parse(created->body).at("id");

    auto rendered = client.Post("/sessions/" + id + "/render", R"({"focal":0.3})", "application/json");
    ASSERT_TRUE(rendered);
    EXPECT_EQ(rendered->status, 200);
    EXPECT_EQ(rendered->get_header_value("Content-Type"), "image/png");
    EXPECT_EQ(rendered->body, service.render(id, R"({"focal":0.3})").body);

    auto defocus = client.Get("/sessions/" + id + "/defocus?focal=0.3");
    ASSERT_TRUE(defocus);
    EXPECT_EQ(defocus->status, 200);
    auto missing = client.Get("/sessions/unknown/defocus?focal=0.3");
    ASSERT_TRUE(missing);
    EXPECT_EQ(missing->status, 404);
    auto incomplete = client.Post("/sessions", httplib::MultipartFormDataItems{{"image", u.image, "a.png", "image/png"}});
    ASSERT_TRUE(incomplete);
    EXPECT_EQ(incomplete->status, 400);
    auto preflight = client.Options("/sessions");
    ASSERT_TRUE(preflight);
    EXPECT_EQ(preflight->status, 204);
    server.stop();
}
