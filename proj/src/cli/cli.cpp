#include "amt/cli.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>

#include "amt/io.hpp"
#include "amt/metrics.hpp"
#include "amt/network.hpp"
#include "amt/parallel.hpp"

namespace amt::cli {
namespace fs = std::filesystem;

namespace {

std::string fixed(double v, int digits = 6) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

struct InterpolateArgs {
  std::string frame0;
  std::string frame1;
  std::string weights;
  std::string out;
  double time = 0.5;
  int steps = 0;
  std::string dump_dir;
  int threads = 0;
};

struct InfoArgs {
  std::string weights;
  std::string resolution = "1280x720";
  bool json = false;
};

struct EvalArgs {
  std::string dir;
  std::string weights;
  std::string csv;
  int threads = 0;
};

struct InitArgs {
  std::string variant = "S";
  std::uint64_t seed = 0;
  std::string out;
  int fields = 0;
  int radius = -1;
};

std::optional<ModelWeights> load_or_report(const std::string& path, std::ostream& err) {
  try {
    return load_weights(path);
  } catch (const Error& e) {
    err << "error: weights " << path << ": " << e.what() << " [" << error_code_name(e.code())
        << "]\n";
    return std::nullopt;
  }
}

// Pads both frames, runs the model, crops back. Returns the padded output
// alongside the cropped frame.
struct Interpolation {
  MultiFieldOutput raw;
  Tensor frame;
  CropBox crop_box;
};

Interpolation interpolate_frames(const Tensor& f0, const Tensor& f1, float t,
                                 const ModelWeights& w) {
  const int m = w.config().required_multiple();
  const Padded p0 = pad_to_multiple(f0, m);
  const Padded p1 = pad_to_multiple(f1, m);
  Interpolation r;
  r.raw = interpolate_forward(p0.image, p1.image, t, w);
  r.crop_box = p0.crop;
  r.frame = crop(r.raw.frame, p0.crop);
  return r;
}

int cmd_interpolate(const InterpolateArgs& a, std::ostream& out, std::ostream& err) {
  if (a.threads > 0) set_num_threads(a.threads);
  std::vector<float> times;
  if (a.steps > 0) {
    times = time_steps(a.steps);
  } else {
    if (!(a.time > 0.0 && a.time < 1.0)) {
      err << "error: --time must lie strictly between 0 and 1, got " << a.time << "\n";
      return kInvalidTime;
    }
    times.push_back(static_cast<float>(a.time));
  }

  Image8 img0, img1;
  try {
    img0 = read_image(a.frame0);
    img1 = read_image(a.frame1);
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kUnreadableInput;
  }
  if (img0.width != img1.width || img0.height != img1.height) {
    err << "error: frame sizes differ: " << img0.width << "x" << img0.height << " vs "
        << img1.width << "x" << img1.height << "\n";
    return kDimensionMismatch;
  }
  const auto weights = load_or_report(a.weights, err);
  if (!weights) return kWeightsError;

  const Tensor f0 = image_to_tensor(img0);
  const Tensor f1 = image_to_tensor(img1);
  if (!a.dump_dir.empty()) fs::create_directories(a.dump_dir);
  const int count = static_cast<int>(times.size());
  for (int i = 0; i < count; ++i) {
    const Interpolation r = interpolate_frames(f0, f1, times[i], *weights);
    const std::string path = output_path(a.out, i + 1, count);
    write_image(tensor_to_image(r.frame), path);
    out << "t=" << fixed(times[i], 4) << " -> " << path << "\n";
    if (!a.dump_dir.empty()) {
      auto planes = flow_dump_planes(r.raw);
      for (auto& p : planes) p.data = crop(p.data, r.crop_box);
      const std::string name = count > 1 ? "flows_" + std::to_string(i + 1) + ".amtf" : "flows.amtf";
      write_flow_dump(planes, fs::path(a.dump_dir) / name);
    }
  }
  return kOk;
}

int cmd_info(const InfoArgs& a, std::ostream& out, std::ostream& err) {
  int width = 0, height = 0;
  if (std::sscanf(a.resolution.c_str(), "%dx%d", &width, &height) != 2 || width < 1 ||
      height < 1) {
    err << "error: --resolution must look like 1280x720\n";
    return kUsage;
  }
  const auto weights = load_or_report(a.weights, err);
  if (!weights) return kWeightsError;
  const ModelConfig& cfg = weights->config();
  const std::int64_t params = count_parameters(*weights);
  const std::int64_t flops = estimate_flops(cfg, height, width);

  if (a.json) {
    nlohmann::json j;
    j["variant"] = variant_name(cfg.variant);
    j["parameters"] = params;
    j["parameters_m"] = static_cast<double>(params) / 1e6;
    j["resolution"] = {{"width", width}, {"height", height}};
    j["flops"] = flops;
    j["flops_t"] = static_cast<double>(flops) / 1e12;
    j["corr_channels"] = cfg.corr_channels();
    j["config"] = {{"corr_dim", cfg.corr_dim},
                   {"context", {cfg.context[0], cfg.context[1], cfg.context[2]}},
                   {"pyramid_levels", cfg.pyramid_levels},
                   {"radius", cfg.radius},
                   {"num_fields", cfg.num_fields},
                   {"upsample_corr_feature", cfg.upsample_corr_feature},
                   {"required_multiple", cfg.required_multiple()}};
    out << j.dump() << "\n";
    return kOk;
  }
  out << "variant            " << variant_name(cfg.variant) << "\n"
      << "parameters         " << params << " (" << fixed(params / 1e6, 3) << " M)\n"
      << "flops @ " << width << "x" << height << "  " << flops << " (" << fixed(flops / 1e12, 4)
      << " T)\n"
      << "corr channels      " << cfg.corr_channels() << "\n"
      << "corr_dim           " << cfg.corr_dim << "\n"
      << "context widths     " << cfg.context[0] << ", " << cfg.context[1] << ", "
      << cfg.context[2] << "\n"
      << "pyramid levels     " << cfg.pyramid_levels << "\n"
      << "radius             " << cfg.radius << "\n"
      << "fields             " << cfg.num_fields << "\n"
      << "upsample corr      " << (cfg.upsample_corr_feature ? "yes" : "no") << "\n";
  return kOk;
}

bool is_image(const fs::path& p) {
  std::string ext = p.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
  return ext == ".png" || ext == ".ppm";
}

int cmd_eval(const EvalArgs& a, std::ostream& out, std::ostream& err) {
  if (a.threads > 0) set_num_threads(a.threads);
  std::error_code ec;
  if (!fs::is_directory(a.dir, ec)) {
    err << "error: " << a.dir << " is not a readable directory\n";
    return kUnreadableInput;
  }
  std::vector<fs::path> triplets;
  for (const auto& entry : fs::directory_iterator(a.dir)) {
    if (entry.is_directory()) triplets.push_back(entry.path());
  }
  std::sort(triplets.begin(), triplets.end());
  if (triplets.empty()) {
    err << "error: no triplet directories in " << a.dir << "\n";
    return kEmptyDirectory;
  }
  const auto weights = load_or_report(a.weights, err);
  if (!weights) return kWeightsError;

  struct Row {
    std::string id;
    MetricReport m;
  };
  std::vector<Row> rows;
  int failures = 0;
  for (const fs::path& dir : triplets) {
    const std::string id = dir.filename().string();
    try {
      std::vector<fs::path> files;
      for (const auto& entry : fs::directory_iterator(dir)) {
        if (entry.is_regular_file() && is_image(entry.path())) files.push_back(entry.path());
      }
      std::sort(files.begin(), files.end());
      require(files.size() == 3, ErrorCode::kDecode,
              "expected 3 images, found " + std::to_string(files.size()));
      const Image8 a0 = read_image(files[0]);
      const Image8 gt = read_image(files[1]);
      const Image8 a1 = read_image(files[2]);
      require(a0.width == gt.width && a0.width == a1.width && a0.height == gt.height &&
                  a0.height == a1.height,
              ErrorCode::kShapeMismatch, "triplet images differ in size");
      const Interpolation r =
          interpolate_frames(image_to_tensor(a0), image_to_tensor(a1), 0.5f, *weights);
      // Score the 8-bit frame a user would actually receive.
      const Tensor pred = image_to_tensor(tensor_to_image(r.frame));
      rows.push_back(Row{id, evaluate_metrics(pred, image_to_tensor(gt))});
    } catch (const Error& e) {
      ++failures;
      err << "warning: skipping triplet " << id << ": " << e.what() << "\n";
    }
  }

  MetricReport mean;
  for (const Row& r : rows) {
    mean.psnr += r.m.psnr;
    mean.ssim += r.m.ssim;
    mean.charbonnier += r.m.charbonnier;
    mean.census += r.m.census;
  }
  if (!rows.empty()) {
    const double n = static_cast<double>(rows.size());
    mean.psnr /= n;
    mean.ssim /= n;
    mean.charbonnier /= n;
    mean.census /= n;
  }

  out << "id                 psnr      ssim  charbonnier     census\n";
  auto line = [&out](const std::string& id, const MetricReport& m) {
    char buf[160];
    std::snprintf(buf, sizeof buf, "%-12s %10.4f %9.5f %12.6f %10.6f\n", id.c_str(), m.psnr,
                  m.ssim, m.charbonnier, m.census);
    out << buf;
  };
  for (const Row& r : rows) line(r.id, r.m);
  line("mean", mean);
  out << "evaluated " << rows.size() << " triplet(s), skipped " << failures << "\n";

  if (!a.csv.empty()) {
    std::ofstream csv(a.csv, std::ios::trunc);
    if (!csv) {
      err << "error: cannot write " << a.csv << "\n";
      return kUnreadableInput;
    }
    csv << "id,psnr,ssim,charbonnier,census\n";
    auto row = [&csv](const std::string& id, const MetricReport& m) {
      csv << id << ',' << fixed(m.psnr, 9) << ',' << fixed(m.ssim, 9) << ','
          << fixed(m.charbonnier, 9) << ',' << fixed(m.census, 9) << '\n';
    };
    for (const Row& r : rows) row(r.id, r.m);
    row("mean", mean);
  }
  return rows.empty() ? kUnreadableInput : kOk;
}

int cmd_init(const InitArgs& a, std::ostream& out, std::ostream& err) {
  Variant v;
  if (!parse_variant(a.variant, v)) {
    err << "error: unknown variant " << a.variant << " (expected S, L or G)\n";
    return kUsage;
  }
  ModelConfig cfg = ModelConfig::preset(v);
  if (a.fields > 0) cfg.num_fields = a.fields;
  if (a.radius >= 0) cfg.radius = a.radius;
  try {
    const ModelWeights w = random_init_weights(cfg, a.seed);
    save_weights(w, a.out);
    out << "wrote " << variant_name(cfg.variant) << " weights (" << count_parameters(w)
        << " parameters, seed " << a.seed << ") to " << a.out << "\n";
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return e.code() == ErrorCode::kIo ? kUnreadableInput : kUsage;
  }
  return kOk;
}

}  // namespace

std::vector<float> time_steps(int steps) {
  std::vector<float> out;
  for (int i = 1; i <= steps; ++i) {
    out.push_back(static_cast<float>(static_cast<double>(i) / (steps + 1)));
  }
  return out;
}

std::string output_path(const std::string& pattern, int index, int count) {
  const auto brace = pattern.find("{}");
  if (brace != std::string::npos) {
    return pattern.substr(0, brace) + std::to_string(index) + pattern.substr(brace + 2);
  }
  if (count <= 1) return pattern;
  const fs::path p(pattern);
  const fs::path name = p.stem().string() + "_" + std::to_string(index) + p.extension().string();
  return (p.parent_path() / name).string();
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Frame interpolation engine"};
  app.require_subcommand(1);

  InterpolateArgs ia;
  auto* interp = app.add_subcommand("interpolate", "Synthesize intermediate frame(s)");
  interp->add_option("--frame0", ia.frame0, "First frame (PNG or PPM)")->required();
  interp->add_option("--frame1", ia.frame1, "Second frame (PNG or PPM)")->required();
  interp->add_option("--weights", ia.weights, "AMTW weights file")->required();
  interp->add_option("--out", ia.out, "Output path, or pattern with {} for --steps")->required();
  auto* time_opt = interp->add_option("--time", ia.time, "Time step in (0, 1)");
  interp->add_option("--steps", ia.steps, "Emit k frames at t = 1/(k+1) .. k/(k+1)")
      ->check(CLI::PositiveNumber)
      ->excludes(time_opt);
  interp->add_option("--dump-flows", ia.dump_dir, "Directory for per-group flow/mask dumps");
  interp->add_option("--threads", ia.threads, "Worker threads")->check(CLI::PositiveNumber);

  InfoArgs info;
  auto* info_cmd = app.add_subcommand("info", "Report parameters, FLOPs and config");
  info_cmd->add_option("--weights", info.weights, "AMTW weights file")->required();
  info_cmd->add_option("--resolution", info.resolution, "WxH used for the FLOP estimate");
  info_cmd->add_flag("--json", info.json, "Emit a single JSON object");

  EvalArgs ev;
  auto* eval_cmd = app.add_subcommand("eval", "Evaluate midpoint interpolation on triplets");
  eval_cmd->add_option("--dir", ev.dir, "Directory of triplet subdirectories")->required();
  eval_cmd->add_option("--weights", ev.weights, "AMTW weights file")->required();
  eval_cmd->add_option("--csv", ev.csv, "Write per-triplet metrics as CSV");
  eval_cmd->add_option("--threads", ev.threads, "Worker threads")->check(CLI::PositiveNumber);

  InitArgs init;
  auto* init_cmd = app.add_subcommand("init", "Write seeded random weights");
  init_cmd->add_option("--variant", init.variant, "S, L or G");
  init_cmd->add_option("--seed", init.seed, "RNG seed");
  init_cmd->add_option("--out", init.out, "Output weights path")->required();
  init_cmd->add_option("--fields", init.fields, "Override the number of flow fields")
      ->check(CLI::PositiveNumber);
  init_cmd->add_option("--radius", init.radius, "Override the lookup radius")
      ->check(CLI::NonNegativeNumber);

  std::vector<const char*> argv{"amt"};
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (*interp) return cmd_interpolate(ia, out, err);
    if (*info_cmd) return cmd_info(info, out, err);
    if (*eval_cmd) return cmd_eval(ev, out, err);
    if (*init_cmd) return cmd_init(init, out, err);
  } catch (const Error& e) {
    err << "error: " << e.what() << " [" << error_code_name(e.code()) << "]\n";
    return kUnreadableInput;
  }
  return kUsage;
}

}  // namespace amt::cli
