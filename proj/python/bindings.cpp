#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "softbokeh/defocus.hpp"
#include "softbokeh/fusion.hpp"
#include "softbokeh/image_io.hpp"
#include "softbokeh/imageops.hpp"
#include "softbokeh/kernels.hpp"
#include "softbokeh/metrics.hpp"
#include "softbokeh/parallel.hpp"
#include "softbokeh/radiance.hpp"
#include "softbokeh/render.hpp"
#include "softbokeh/synth.hpp"

namespace py = pybind11;
using namespace softbokeh;

namespace {

using FloatArray = py::array_t<float, py::array::c_style | py::array::forcecast>;

// (H, W) arrays map to one channel, (H, W, 3) arrays to three.
PlanarImage to_image(const FloatArray& a) {
    if (a.ndim() != 2 && a.ndim() != 3) throw std::invalid_argument("expected an (H, W) or (H, W, C) array");
    const int h = static_cast<int>(a.shape(0));
    const int w = static_cast<int>(a.shape(1));
    const int c = a.ndim() == 3 ? static_cast<int>(a.shape(2)) : 1;
    PlanarImage img(w, h, c);
    const float* src = a.data();
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x)
            for (int k = 0; k < c; ++k) img.at(k, x, y) = src[(static_cast<std::size_t>(y) * w + x) * c + k];
    return img;
}

FloatArray to_array(const PlanarImage& img) {
    const int h = img.height();
    const int w = img.width();
    const int c = img.channels();
    FloatArray a = c == 1 ? FloatArray({h, w}) : FloatArray({h, w, c});
    float* dst = a.mutable_data();
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x)
            for (int k = 0; k < c; ++k) dst[(static_cast<std::size_t>(y) * w + x) * c + k] = img.at(k, x, y);
    return a;
}

DefocusMap to_defocus(const FloatArray& a) { return DefocusMap{to_image(a)}; }

py::array_t<double> kernel_taps(const Kernel2D& k) {
    py::array_t<double> a({k.size(), k.size()});
    std::copy(k.taps().begin(), k.taps().end(), a.mutable_data());
    return a;
}

ImageKind parse_kind(const std::string& kind) {
    if (kind == "rgb8") return ImageKind::rgb8;
    if (kind == "gray16") return ImageKind::gray16;
    if (kind == "pfm") return ImageKind::pfm;
    throw std::invalid_argument("unknown image kind '" + kind + "' (rgb8, gray16, pfm)");
}

ConvolutionMode parse_mode(const std::string& mode) {
    if (mode == "optimized") return ConvolutionMode::optimized;
    if (mode == "reference") return ConvolutionMode::reference;
    throw std::invalid_argument("unknown convolution mode '" + mode + "' (reference, optimized)");
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Layered synthetic bokeh rendering with soft disk kernels and Poisson fusion";

    py::register_exception<ImageIoError>(m, "ImageIoError", PyExc_IOError);

    m.def("set_thread_count", &set_thread_count, py::arg("count"));
    m.def("thread_count", &thread_count);

    m.def("load_image", [](const std::string& path, const std::string& kind) {
        return to_array(load_image(path, parse_kind(kind)));
    }, py::arg("path"), py::arg("kind") = "rgb8");
    m.def("load_disparity", [](const std::string& path) { return to_array(load_disparity(path)); }, py::arg("path"));
    m.def("save_png8", [](const FloatArray& a, const std::string& path) { save_png8(to_image(a), path); });
    m.def("save_png16", [](const FloatArray& a, const std::string& path) { save_png16(to_image(a), path); });
    m.def("save_pfm", [](const FloatArray& a, const std::string& path) { save_pfm(to_image(a), path); });

    py::class_<Kernel2D>(m, "Kernel2D")
        .def_static("identity", &Kernel2D::identity)
        .def_property_readonly("size", &Kernel2D::size)
        .def_property_readonly("radius", &Kernel2D::radius)
        .def_property_readonly("taps", &kernel_taps)
        .def("sum", &Kernel2D::sum);
    m.def("hard_disk", &hard_disk, py::arg("radius"));
    m.def("soft_disk", &soft_disk, py::arg("radius"), py::arg("sigma") = 0.25, py::arg("phi") = 0.5);
    m.def("growing_kernel_size", &growing_kernel_size, py::arg("l"));
    m.def("growing_schedule", [] { return growing_schedule().sizes; });
    m.def("uniform_schedule", [](int layers, int step) { return uniform_schedule(layers, step).sizes; },
          py::arg("layers"), py::arg("step") = 4);
    m.def("gaussian_kernel", &gaussian_kernel, py::arg("radius"));

    m.def("convolve", [](const FloatArray& a, const Kernel2D& k, const std::string& mode) {
        PlanarImage img = to_image(a);
        PlanarImage out(1, 1, 1);
        {
            py::gil_scoped_release release;
            out = convolve(img, k, parse_mode(mode));
        }
        return to_array(out);
    }, py::arg("image"), py::arg("kernel"), py::arg("mode") = "optimized");
    m.def("resize_bilinear", [](const FloatArray& a, int w, int h) { return to_array(resize_bilinear(to_image(a), w, h)); },
          py::arg("image"), py::arg("width"), py::arg("height"));
    m.def("laplacian", [](const FloatArray& a) { return to_array(laplacian(to_image(a))); });

    m.def("signed_defocus", [](const FloatArray& d, double f) { return to_array(signed_defocus(to_image(d), f).raster); },
          py::arg("disparity"), py::arg("focal"));
    m.def("defocus_map", [](const FloatArray& d, double f, const std::string& mode) {
        return to_array(defocus_magnitude(signed_defocus(to_image(d), f), parse_normalization(mode)).raster);
    }, py::arg("disparity"), py::arg("focal"), py::arg("normalization") = "fixed_range");
    m.def("binary_mask", [](const FloatArray& d, double theta) { return to_array(binary_mask(to_defocus(d), theta)); },
          py::arg("defocus"), py::arg("theta") = 0.25);
    m.def("layer_masks", [](const FloatArray& d, int layers, double gamma) {
        std::vector<FloatArray> out;
        for (const auto& mask : layer_masks(to_defocus(d), layers, gamma)) out.push_back(to_array(mask.raster));
        return out;
    }, py::arg("defocus"), py::arg("layers") = 15, py::arg("gamma") = 100.0);

    py::class_<RadianceParams>(m, "RadianceParams")
        .def(py::init<>())
        .def_readwrite("alpha", &RadianceParams::alpha)
        .def_readwrite("beta", &RadianceParams::beta)
        .def_readwrite("bright_threshold", &RadianceParams::bright_threshold)
        .def_readwrite("any_channel", &RadianceParams::any_channel)
        .def_property("base_map", [](const RadianceParams& p) { return to_string(p.base); },
                      [](RadianceParams& p, const std::string& s) { p.base = parse_base_map(s); });
    m.def("virtualize", [](const FloatArray& a, const RadianceParams& p) {
        return to_array(virtualize(to_image(a), p).raster);
    }, py::arg("image"), py::arg("params") = RadianceParams{});

    py::class_<RenderConfig>(m, "RenderConfig")
        .def(py::init<>())
        .def_readonly("layers", &RenderConfig::layers)
        .def_readwrite("gamma", &RenderConfig::gamma)
        .def_readwrite("radiance", &RenderConfig::radiance)
        .def_readwrite("eps_div", &RenderConfig::eps_div)
        .def_property("normalization", [](const RenderConfig& c) { return to_string(c.normalization); },
                      [](RenderConfig& c, const std::string& s) { c.normalization = parse_normalization(s); })
        .def_property_readonly("kernel_sizes", [](const RenderConfig& c) { return c.bank.schedule.sizes; })
        .def("set_bank", [](RenderConfig& c, std::vector<int> sizes, const std::string& shape, double sigma, double phi) {
            c.bank = build_bank(KernelSchedule{std::move(sizes), ScheduleSampling::growing}, parse_kernel_shape(shape),
                                sigma, phi);
            c.layers = c.bank.layers();
        }, py::arg("sizes"), py::arg("shape") = "soft", py::arg("sigma") = 0.25, py::arg("phi") = 0.5)
        .def("with_blur_scale", &with_blur_scale, py::arg("blur_scale"));

    py::class_<FusionConfig>(m, "FusionConfig")
        .def(py::init<>())
        .def_readwrite("theta", &FusionConfig::theta)
        .def_readwrite("zeta", &FusionConfig::zeta)
        .def_readwrite("feather_radius", &FusionConfig::feather_radius)
        .def_readwrite("steps", &FusionConfig::steps)
        .def_readwrite("learning_rate", &FusionConfig::learning_rate)
        .def_readwrite("pyramid_levels", &FusionConfig::pyramid_levels)
        .def_property("method", [](const FusionConfig& c) { return to_string(c.method); },
                      [](FusionConfig& c, const std::string& s) { c.method = parse_fusion_method(s); });

    m.def("layered_render", [](const FloatArray& img, const FloatArray& d, const RenderConfig& cfg) {
        const PlanarImage i = to_image(img);
        const DefocusMap dm = to_defocus(d);
        PlanarImage out(1, 1, 1);
        {
            py::gil_scoped_release release;
            out = layered_render(i, dm, cfg);
        }
        return to_array(out);
    }, py::arg("image"), py::arg("defocus"), py::arg("config") = RenderConfig{});
    m.def("weighted_render", [](const FloatArray& img, const FloatArray& r, const FloatArray& d, const RenderConfig& cfg) {
        const PlanarImage i = to_image(img);
        const RadianceMap rm{to_image(r)};
        const DefocusMap dm = to_defocus(d);
        PlanarImage out(1, 1, 1);
        {
            py::gil_scoped_release release;
            out = weighted_render(i, rm, dm, cfg);
        }
        return to_array(out);
    }, py::arg("image"), py::arg("radiance"), py::arg("defocus"), py::arg("config") = RenderConfig{});
    m.def("render_pipeline", [](const FloatArray& img, const FloatArray& disp, double focal, const RenderConfig& cfg,
                                const FusionConfig& fusion) {
        const PlanarImage i = to_image(img);
        const PlanarImage d = to_image(disp);
        PlanarImage out(1, 1, 1);
        {
            py::gil_scoped_release release;
            out = render_pipeline(i, d, focal, cfg, fusion);
        }
        return to_array(out);
    }, py::arg("image"), py::arg("disparity"), py::arg("focal"), py::arg("config") = RenderConfig{},
       py::arg("fusion") = FusionConfig{});

    py::class_<RefocusSession>(m, "RefocusSession")
        .def(py::init([](const FloatArray& img, const FloatArray& disp, const RenderConfig& cfg, const FusionConfig& f) {
            return RefocusSession(to_image(img), to_image(disp), cfg, f);
        }), py::arg("image"), py::arg("disparity"), py::arg("config") = RenderConfig{}, py::arg("fusion") = FusionConfig{})
        .def("refocus", [](const RefocusSession& s, double focal, double blur_scale) {
            PlanarImage out(1, 1, 1);
            {
                py::gil_scoped_release release;
                out = s.refocus(focal, blur_scale);
            }
            return to_array(out);
        }, py::arg("focal"), py::arg("blur_scale") = 1.0)
        .def("defocus_at", [](const RefocusSession& s, double f) { return to_array(s.defocus_at(f).raster); });

    m.def("fuse", [](const FloatArray& sharp, const FloatArray& bokeh, const FloatArray& mask) {
        return to_array(fuse(to_image(sharp), to_image(bokeh), FusionMask{to_image(mask)}));
    });
    m.def("build_target", [](const FloatArray& sharp, const FloatArray& bokeh, const FloatArray& mb) {
        return to_array(build_target(to_image(sharp), to_image(bokeh), to_image(mb)));
    });
    m.def("poisson_loss", [](const FloatArray& t, const FloatArray& f) { return poisson_loss(to_image(t), to_image(f)); });
    m.def("feathered_mask", [](const FloatArray& mb, int radius) { return to_array(feathered_mask(to_image(mb), radius).raster); },
          py::arg("binary"), py::arg("radius") = 5);
    m.def("optimize_mask", [](const FloatArray& sharp, const FloatArray& bokeh, const FloatArray& d, const FusionConfig& cfg) {
        const PlanarImage s = to_image(sharp);
        const PlanarImage b = to_image(bokeh);
        const DefocusMap dm = to_defocus(d);
        OptimizationTrace trace;
        FusionMask mask{PlanarImage(1, 1, 1)};
        {
            py::gil_scoped_release release;
            mask = optimize_mask(s, b, dm, cfg, &trace);
        }
        return py::make_tuple(to_array(mask.raster), trace.loss);
    }, py::arg("sharp"), py::arg("bokeh"), py::arg("defocus"), py::arg("config") = FusionConfig{});
    m.def("blend_laplacian_pyramid", [](const FloatArray& sharp, const FloatArray& bokeh, const FloatArray& mb, int levels) {
        return to_array(blend_laplacian_pyramid(to_image(sharp), to_image(bokeh), to_image(mb), levels));
    }, py::arg("sharp"), py::arg("bokeh"), py::arg("binary"), py::arg("levels") = 4);
    m.def("blend_binary", [](const FloatArray& sharp, const FloatArray& bokeh, const FloatArray& mb) {
        return to_array(blend_binary(to_image(sharp), to_image(bokeh), to_image(mb)));
    });

    m.def("psnr", [](const FloatArray& a, const FloatArray& b, double peak) { return psnr(to_image(a), to_image(b), peak); },
          py::arg("a"), py::arg("b"), py::arg("peak") = 1.0);
    m.def("ssim", [](const FloatArray& a, const FloatArray& b) { return ssim(to_image(a), to_image(b)); });
    m.def("l1", [](const FloatArray& a, const FloatArray& b) { return l1(to_image(a), to_image(b)); });

    m.def("make_scene", [](const std::string& recipe, int w, int h, std::uint64_t seed) {
        const SyntheticScene s = make_scene(parse_recipe(recipe), w, h, seed);
        py::dict d;
        d["image"] = to_array(s.image);
        d["disparity"] = to_array(s.disparity);
        d["description"] = s.description;
        d["highlights"] = s.highlights;
        return d;
    }, py::arg("recipe"), py::arg("width"), py::arg("height"), py::arg("seed") = 0);
    m.def("ground_truth_composite", [](const std::string& recipe, int w, int h, std::uint64_t seed, double focal,
                                       const RenderConfig& cfg) {
        return to_array(ground_truth_composite(make_scene(parse_recipe(recipe), w, h, seed), focal, cfg));
    }, py::arg("recipe"), py::arg("width"), py::arg("height"), py::arg("seed"), py::arg("focal"),
       py::arg("config") = RenderConfig{});
}
