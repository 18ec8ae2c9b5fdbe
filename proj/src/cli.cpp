#include "softbokeh/cli.hpp"

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <limits>
#include <map>
#include <optional>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "softbokeh/image_io.hpp"
#include "softbokeh/kernels.hpp"
#include "softbokeh/metrics.hpp"
#include "softbokeh/parallel.hpp"
#include "softbokeh/service.hpp"
#include "softbokeh/synth.hpp"

namespace softbokeh {

namespace fs = std::filesystem;
using nlohmann::json;

RenderConfig CliConfig::render_config() const {
    KernelSchedule s;
    if (schedule == "growing") {
        if (layers != 15) throw std::invalid_argument("the growing schedule has exactly 15 layers");
        s = growing_schedule();
    } else if (schedule == "uniform") {
        s = uniform_schedule(layers, uniform_step);
    } else {
        throw std::invalid_argument("unknown schedule '" + schedule + "' (growing, uniform)");
    }
    RenderConfig cfg;
    cfg.layers = s.layers();
    cfg.bank = build_bank(s, parse_kernel_shape(shape), sigma, phi);
    cfg.gamma = gamma;
    cfg.radiance.alpha = alpha;
    cfg.radiance.beta = beta;
    cfg.radiance.bright_threshold = bright_threshold;
    cfg.radiance.base = parse_base_map(base_map);
    cfg.radiance.any_channel = any_channel;
    cfg.eps_div = eps_div;
    cfg.normalization = parse_normalization(normalization);
    cfg.validate();
    return cfg;
}

FusionConfig CliConfig::fusion_config() const {
    FusionConfig f;
    f.theta = theta;
    f.zeta = zeta;
    f.feather_radius = feather_radius;
    f.steps = steps;
    f.learning_rate = lr;
    f.method = parse_fusion_method(method);
    f.pyramid_levels = pyramid_levels;
    f.validate();
    return f;
}

namespace {

std::string fixed(double v, int digits = 6) {
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    std::ostringstream s;
    s << std::fixed << std::setprecision(digits) << v;
    return s.str();
}

bool has_extension(const fs::path& p, const char* ext) {
    std::string e = p.extension().string();
    std::transform(e.begin(), e.end(), e.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return e == ext;
}

void save_output(const PlanarImage& img, const fs::path& path) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    if (has_extension(path, ".pfm"))
        save_pfm(img, path);
    else
        save_png8(img, path);
}

void write_text(const fs::path& path, const std::string& text) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot write " + path.string());
    f << text;
    if (!f) throw std::runtime_error("cannot write " + path.string());
}

PlanarImage quantize8(const PlanarImage& img) {
    PlanarImage out = img;
    for (float& v : out.samples()) v = static_cast<float>(std::round(std::clamp(v, 0.0f, 1.0f) * 255.0) / 255.0);
    return out;
}

std::string kernel_taps_csv(const Kernel2D& k) {
    std::ostringstream s;
    s << std::setprecision(9);
    for (int y = -k.radius(); y <= k.radius(); ++y) {
        for (int x = -k.radius(); x <= k.radius(); ++x) s << (x > -k.radius() ? "," : "") << k.tap(x, y);
        s << "\n";
    }
    return s.str();
}

PlanarImage kernel_heightmap(const Kernel2D& k) {
    PlanarImage img(k.size(), k.size(), 1);
    double peak = 0.0;
    for (double t : k.taps()) peak = std::max(peak, t);
    for (int y = 0; y < k.size(); ++y)
        for (int x = 0; x < k.size(); ++x)
            img.at(0, x, y) = static_cast<float>(k.tap(x - k.radius(), y - k.radius()) / peak);
    return img;
}

std::string layer_name(const char* prefix, int layer, const char* ext) {
    std::ostringstream s;
    s << prefix << std::setw(2) << std::setfill('0') << layer << ext;
    return s.str();
}

double default_focal(const SceneRecipe& r) {
    switch (r.kind) {
        case SceneKind::flat: return r.disparity;
        case SceneKind::two_plane: return r.d_fg;
        case SceneKind::ramp: return 0.5;
        case SceneKind::highlights: return r.d_fg;
    }
    return 0.0;
}

struct RenderArgs {
    std::string input, disparity, out, dump;
    double focal = 0.0;
    double blur_scale = 1.0;
};

struct BenchArgs {
    std::string dir, out, json_out;
    double blur_scale = 1.0;
};

struct KernelArgs {
    std::string out;
};

struct SynthArgs {
    std::string out;
    std::string recipe = "two_plane:0:0.7:disk";
    int count = 1;
    int width = 256;
    int height = 256;
    std::optional<double> focal;
    double gt_scale = 2.0;
};

struct FuseArgs {
    std::string input, bokeh, disparity, out, mask_out, trace_out;
    double focal = 0.0;
};

struct ServeArgs {
    std::string host = "127.0.0.1";
    int port = 0;
};

int cmd_render(const CliConfig& cfg, const RenderArgs& a, std::ostream& out) {
    const RenderConfig base = cfg.render_config();
    const RenderConfig render = a.blur_scale == 1.0 ? base : with_blur_scale(base, a.blur_scale);
    const FusionConfig fusion = cfg.fusion_config();
    const PlanarImage image = load_image(a.input, ImageKind::rgb8);
    const PlanarImage disparity = load_disparity(a.disparity);

    PipelineIntermediates inter;
    const PlanarImage result = render_pipeline(image, disparity, a.focal, render, fusion, &inter);
    save_output(result, a.out);
    out << "wrote " << a.out << "\n";

    if (!a.dump.empty()) {
        const fs::path dir(a.dump);
        fs::create_directories(dir);
        save_png16(inter.defocus_lr->raster, dir / "defocus.png");
        save_pfm(inter.radiance_lr->raster, dir / "radiance.pfm");
        save_png16(inter.fusion_mask->raster, dir / "mask.png");
        save_png8(*inter.bokeh_lr, dir / "bokeh_lr.png");
        const PlanarImage half = resize_bilinear(image, inter.defocus_lr->raster.width(), inter.defocus_lr->raster.height());
        out << "intermediates in " << dir.string() << " (defocus smoothness over " << cfg.scales
            << " scales: " << fixed(defocus_smoothness(*inter.defocus_lr, half, cfg.scales), 8) << ")\n";
    }
    return 0;
}

int cmd_bench(const CliConfig& cfg, const BenchArgs& a, std::ostream& out) {
    const RenderConfig base = cfg.render_config();
    const RenderConfig render = a.blur_scale == 1.0 ? base : with_blur_scale(base, a.blur_scale);
    const FusionConfig fusion_base = cfg.fusion_config();

    std::vector<fs::path> scenes;
    if (!fs::is_directory(a.dir)) throw std::runtime_error("not a directory: " + a.dir);
    for (const auto& entry : fs::directory_iterator(a.dir))
        if (entry.is_directory() && fs::exists(entry.path() / "scene.json") && fs::exists(entry.path() / "gt.pfm"))
            scenes.push_back(entry.path());
    if (scenes.empty()) throw std::runtime_error("no synthetic scenes with ground truth in " + a.dir);
    std::sort(scenes.begin(), scenes.end());

    const std::vector<FusionMethod> methods = all_fusion_methods();
    std::map<FusionMethod, MetricReport> reports;
    std::ostringstream csv;
    csv << "scene,method,psnr,ssim,l1,rank\n";
    json rows = json::array();
    for (const auto& dir : scenes) {
        std::ifstream meta_file(dir / "scene.json");
        const json meta = json::parse(meta_file);
        const double focal = meta.at("focal").get<double>();
        const PlanarImage image = load_image(dir / "image.png", ImageKind::rgb8);
        const PlanarImage disparity = load_disparity(dir / "disparity.pfm");
        const PlanarImage gt = load_image(dir / "gt.pfm", ImageKind::pfm);
        const std::string name = dir.filename().string();
        for (FusionMethod m : methods) {
            FusionConfig fusion = fusion_base;
            fusion.method = m;
            const MetricRecord r = evaluate(render_pipeline(image, disparity, focal, render, fusion), gt);
            reports[m].add(name, r);
            csv << name << "," << to_string(m) << "," << fixed(r.psnr) << "," << fixed(r.ssim) << "," << fixed(r.l1)
                << ",\n";
            rows.push_back({{"scene", name}, {"method", to_string(m)}, {"psnr", r.psnr}, {"ssim", r.ssim}, {"l1", r.l1}});
        }
    }

    std::vector<std::pair<FusionMethod, MetricRecord>> means;
    for (FusionMethod m : methods) means.emplace_back(m, reports[m].mean());
    std::stable_sort(means.begin(), means.end(),
                     [](const auto& x, const auto& y) { return x.second.psnr > y.second.psnr; });
    json summary = json::array();
    int rank = 1;
    for (const auto& [m, r] : means) {
        csv << "mean," << to_string(m) << "," << fixed(r.psnr) << "," << fixed(r.ssim) << "," << fixed(r.l1) << ","
            << rank << "\n";
        summary.push_back({{"method", to_string(m)}, {"psnr", r.psnr}, {"ssim", r.ssim}, {"l1", r.l1}, {"rank", rank}});
        ++rank;
    }

    if (a.out.empty())
        out << csv.str();
    else
        write_text(a.out, csv.str());
    if (!a.json_out.empty())
        write_text(a.json_out, json{{"scenes", rows}, {"summary", summary}}.dump(2) + "\n");
    return 0;
}

int cmd_kernels(const CliConfig& cfg, const KernelArgs& a, std::ostream& out) {
    const RenderConfig render = cfg.render_config();
    const fs::path dir(a.out);
    fs::create_directories(dir);
    std::ostringstream sizes;
    sizes << "layer,side,radius\n";
    for (int l = 1; l <= render.layers; ++l) {
        const Kernel2D& k = render.bank[l - 1];
        sizes << l << "," << k.size() << "," << k.radius() << "\n";
        save_png16(kernel_heightmap(k), dir / layer_name("kernel_", l, ".png"));
        write_text(dir / layer_name("kernel_", l, ".csv"), kernel_taps_csv(k));
    }
    write_text(dir / "sizes.csv", sizes.str());
    out << "wrote " << render.layers << " " << cfg.shape << " kernels to " << dir.string() << "\n";
    return 0;
}

int cmd_synth(const CliConfig& cfg, const SynthArgs& a, std::ostream& out) {
    if (a.count < 1) throw std::invalid_argument("--count must be >= 1");
    const SceneRecipe recipe = parse_recipe(a.recipe);
    const double focal = a.focal.value_or(default_focal(recipe));
    const RenderConfig gt_cfg = with_blur_scale(cfg.render_config(), a.gt_scale);
    const fs::path root(a.out);
    for (int i = 0; i < a.count; ++i) {
        const std::uint64_t seed = cfg.seed + static_cast<std::uint64_t>(i);
        SyntheticScene scene = make_scene(recipe, a.width, a.height, seed);
        scene.image = quantize8(scene.image);
        std::ostringstream name;
        name << "scene_" << std::setw(3) << std::setfill('0') << i;
        const fs::path dir = root / name.str();
        fs::create_directories(dir);
        save_png8(scene.image, dir / "image.png");
        save_pfm(scene.disparity, dir / "disparity.pfm");
        bool has_gt = false;
        if (recipe.kind == SceneKind::two_plane) {
            save_pfm(ground_truth_composite(scene, focal, gt_cfg), dir / "gt.pfm");
            has_gt = true;
        }
        const json meta{{"recipe", scene.description}, {"seed", seed}, {"focal", focal},
                        {"width", a.width}, {"height", a.height}, {"ground_truth", has_gt},
                        {"ground_truth_blur_scale", a.gt_scale}};
        write_text(dir / "scene.json", meta.dump(2) + "\n");
    }
    out << "wrote " << a.count << " scene(s) to " << root.string() << "\n";
    return 0;
}

int cmd_fuse(const CliConfig& cfg, const FuseArgs& a, std::ostream& out) {
    const FusionConfig fusion = cfg.fusion_config();
    const PlanarImage sharp = load_image(a.input, ImageKind::rgb8);
    const PlanarImage bokeh = load_image(a.bokeh, ImageKind::rgb8);
    const PlanarImage disparity = load_disparity(a.disparity);
    const DefocusMap defocus =
        defocus_magnitude(signed_defocus(disparity, a.focal), parse_normalization(cfg.normalization));
    FusionMask mask{PlanarImage(1, 1, 1)};
    OptimizationTrace trace;
    const PlanarImage fused = fuse_with_method(sharp, bokeh, defocus, fusion, &mask, &trace);
    save_output(fused, a.out);
    if (!a.mask_out.empty()) save_png16(mask.raster, a.mask_out);
    if (!a.trace_out.empty()) {
        std::ostringstream csv;
        csv << "step,loss\n" << std::setprecision(12);
        for (std::size_t i = 0; i < trace.loss.size(); ++i) csv << i << "," << trace.loss[i] << "\n";
        write_text(a.trace_out, csv.str());
    }
    out << "wrote " << a.out << "\n";
    return 0;
}

int cmd_serve(const CliConfig& cfg, const ServeArgs& a, std::ostream& out) {
    int port = a.port;
    if (port == 0) {
        const char* env = std::getenv("SOFTBOKEH_PORT");
        port = env != nullptr ? std::stoi(env) : 8080;
    }
    ServiceOptions options;
    options.render = cfg.render_config();
    options.fusion = cfg.fusion_config();
    PreviewService service(options);
    PreviewServer server(service);
    const int bound = server.bind(a.host, port);
    out << "listening on http://" << a.host << ":" << bound << std::endl;
    server.listen();
    return 0;
}

std::string one_line(std::string text) {
    std::replace(text.begin(), text.end(), '\n', ' ');
    while (!text.empty() && text.back() == ' ') text.pop_back();
    return text;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CliConfig cfg;
    CLI::App app{"softbokeh: synthetic bokeh rendering from an image, a disparity map and a focal plane", "softbokeh"};
    app.fallthrough();
    app.require_subcommand(1);
    app.set_config("--config", "", "TOML file with parameter values (flags take precedence)");
    app.allow_config_extras(CLI::config_extras_mode::error);

    app.add_option("--alpha", cfg.alpha, "Bright-pixel radiance ceiling")->capture_default_str();
    app.add_option("--beta", cfg.beta, "Bright-pixel radiance exponent")->capture_default_str();
    app.add_option("--threshold", cfg.bright_threshold, "Bright-pixel threshold")->capture_default_str();
    app.add_option("--base-map", cfg.base_map, "Radiance base map: identity, luminance, gamma[:g]")->capture_default_str();
    app.add_flag("--any-channel", cfg.any_channel, "Boost all channels when any channel is bright");
    app.add_option("--gamma", cfg.gamma, "Layer-mask sharpness")->capture_default_str();
    app.add_option("--sigma", cfg.sigma, "Soft-disk edge sharpness")->capture_default_str();
    app.add_option("--phi", cfg.phi, "Soft-disk edge offset")->capture_default_str();
    app.add_option("--layers", cfg.layers, "Number of defocus layers")->capture_default_str();
    app.add_option("--schedule", cfg.schedule, "Kernel-size schedule: growing, uniform")->capture_default_str();
    app.add_option("--uniform-step", cfg.uniform_step, "Side increment of the uniform schedule")->capture_default_str();
    app.add_option("--shape", cfg.shape, "Kernel shape: soft, hard")->capture_default_str();
    app.add_option("--eps-div", cfg.eps_div, "Denominator floor")->capture_default_str();
    app.add_option("--normalization", cfg.normalization, "Defocus normalization: fixed_range, per_image_max, none")
        ->capture_default_str();
    app.add_option("--scales", cfg.scales, "Pyramid scales of the defocus smoothness report")->capture_default_str();
    app.add_option("--theta", cfg.theta, "Binary fusion-mask threshold")->capture_default_str();
    app.add_option("--zeta", cfg.zeta, "Poisson loss weight")->capture_default_str();
    app.add_option("--feather-radius", cfg.feather_radius, "Feathered mask radius")->capture_default_str();
    app.add_option("--steps", cfg.steps, "Mask optimization steps")->capture_default_str();
    app.add_option("--lr", cfg.lr, "Mask optimization learning rate")->capture_default_str();
    app.add_option("--method", cfg.method, "Fusion: binary, feathered, laplacian_pyramid, poisson_optimized")
        ->capture_default_str();
    app.add_option("--pyramid-levels", cfg.pyramid_levels, "Laplacian pyramid levels")->capture_default_str();
    app.add_option("--seed", cfg.seed, "Seed for synthetic scenes")->capture_default_str();
    app.add_option("--threads", cfg.threads, "Worker threads (0 = hardware concurrency)")->capture_default_str();

    RenderArgs render_args;
    auto* render = app.add_subcommand("render", "Render shallow depth of field from an image and disparity map");
    render->add_option("--input", render_args.input, "All-in-focus 8-bit PNG")->required();
    render->add_option("--disparity", render_args.disparity, "Disparity map (.pfm or 16-bit PNG)")->required();
    render->add_option("--focal", render_args.focal, "Focal disparity in [0,1]")->required();
    render->add_option("--out", render_args.out, "Output image (.png or .pfm)")->required();
    render->add_option("--blur-scale", render_args.blur_scale, "Kernel-size multiplier")->capture_default_str();
    render->add_option("--dump-intermediates", render_args.dump, "Directory for defocus/radiance/mask/low-res bokeh");

    BenchArgs bench_args;
    auto* bench = app.add_subcommand("bench", "Compare fusion methods on synthetic scenes with ground truth");
    bench->add_option("--dir", bench_args.dir, "Directory written by 'synth'")->required();
    bench->add_option("--out", bench_args.out, "CSV output (stdout when omitted)");
    bench->add_option("--json", bench_args.json_out, "JSON output");
    bench->add_option("--blur-scale", bench_args.blur_scale, "Kernel-size multiplier")->capture_default_str();

    KernelArgs kernel_args;
    auto* kernels = app.add_subcommand("kernels", "Write the kernel bank as heightmaps and tap tables");
    kernels->add_option("--out", kernel_args.out, "Output directory")->required();

    SynthArgs synth_args;
    auto* synth = app.add_subcommand("synth", "Generate synthetic scenes (image, disparity, ground truth)");
    synth->add_option("--out", synth_args.out, "Output directory")->required();
    synth->add_option("--recipe", synth_args.recipe, "flat:D, two_plane:FG:BG:SHAPE, ramp, highlights:N:I")
        ->capture_default_str();
    synth->add_option("--count", synth_args.count, "Number of scenes (seeds seed..seed+count-1)")->capture_default_str();
    synth->add_option("--width", synth_args.width)->capture_default_str();
    synth->add_option("--height", synth_args.height)->capture_default_str();
    synth->add_option("--focal", synth_args.focal, "Focal disparity (defaults to the foreground plane)");
    synth->add_option("--gt-blur-scale", synth_args.gt_scale, "Kernel scale of the full-resolution ground truth")
        ->capture_default_str();

    FuseArgs fuse_args;
    auto* fuse_cmd = app.add_subcommand("fuse", "Fuse a sharp image with an upsampled bokeh image");
    fuse_cmd->add_option("--input", fuse_args.input, "Sharp 8-bit PNG")->required();
    fuse_cmd->add_option("--bokeh", fuse_args.bokeh, "Blurred 8-bit PNG of the same size")->required();
    fuse_cmd->add_option("--disparity", fuse_args.disparity, "Disparity map (.pfm or 16-bit PNG)")->required();
    fuse_cmd->add_option("--focal", fuse_args.focal, "Focal disparity in [0,1]")->required();
    fuse_cmd->add_option("--out", fuse_args.out, "Fused output image")->required();
    fuse_cmd->add_option("--mask-out", fuse_args.mask_out, "Fusion mask as 16-bit PNG");
    fuse_cmd->add_option("--trace-out", fuse_args.trace_out, "Optimizer loss trace CSV");

    ServeArgs serve_args;
    auto* serve = app.add_subcommand("serve", "Run the HTTP preview service");
    serve->add_option("--host", serve_args.host)->capture_default_str();
    serve->add_option("--port", serve_args.port, "Port (default $SOFTBOKEH_PORT or 8080)");

    try {
        app.parse(std::vector<std::string>(args.rbegin(), args.rend()));
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return 0;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return 0;
    } catch (const CLI::ParseError& e) {
        err << "error: " << one_line(e.what()) << "\n";
        const CLI::App* failed = &app;
        for (const CLI::App* sub : app.get_subcommands())
            if (sub->count() > 0) failed = sub;
        err << failed->help();
        return 1;
    }

    try {
        set_thread_count(cfg.threads);
        if (render->parsed()) return cmd_render(cfg, render_args, out);
        if (bench->parsed()) return cmd_bench(cfg, bench_args, out);
        if (kernels->parsed()) return cmd_kernels(cfg, kernel_args, out);
        if (synth->parsed()) return cmd_synth(cfg, synth_args, out);
        if (fuse_cmd->parsed()) return cmd_fuse(cfg, fuse_args, out);
        if (serve->parsed()) return cmd_serve(cfg, serve_args, out);
    } catch (const std::exception& e) {
        err << "error: " << one_line(e.what()) << "\n";
        return 1;
    }
    err << "error: no command given (see --help for usage)\n";
    return 1;
}

}  // namespace softbokeh
