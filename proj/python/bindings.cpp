#include "salut/apply.hpp"
#include "salut/cli.hpp"
#include "salut/context.hpp"
#include "salut/error.hpp"
#include "salut/fitting.hpp"
#include "salut/io.hpp"
#include "salut/lut.hpp"
#include "salut/metrics.hpp"

#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <algorithm>
#include <sstream>

namespace py = pybind11;
using namespace salut;

namespace {

using F32 = py::array_t<float, py::array::c_style | py::array::forcecast>;
using F64 = py::array_t<double, py::array::c_style | py::array::forcecast>;

// Arrays cross the boundary as (3, C, D, D, D) float64 LUTs, (H, W, 3)
// float32 images and (H, W) float32 context maps.

Lut4D lutFrom(const F64& a)
{
    if (a.ndim() != 5 || a.shape(0) != 3 || a.shape(2) != a.shape(3) || a.shape(3) != a.shape(4)) {
        throw py::value_error("LUT array must have shape (3, C, D, D, D)");
    }
    return Lut4D(static_cast<std::size_t>(a.shape(2)), static_cast<std::size_t>(a.shape(1)),
                 std::vector<double>(a.data(), a.data() + a.size()));
}

F64 lutTo(const Lut4D& lut)
{
    const auto d = static_cast<py::ssize_t>(lut.size());
    F64 out({py::ssize_t{3}, static_cast<py::ssize_t>(lut.bins()), d, d, d});
    std::ranges::copy(lut.entries(), out.mutable_data());
    return out;
}

ImageBuffer imageFrom(const F32& a)
{
    if (a.ndim() != 3 || a.shape(2) != 3) {
        throw py::value_error("image array must have shape (H, W, 3)");
    }
    return ImageBuffer(static_cast<std::size_t>(a.shape(0)), static_cast<std::size_t>(a.shape(1)),
                       std::vector<float>(a.data(), a.data() + a.size()));
}

F32 imageTo(const ImageBuffer& img)
{
    F32 out({static_cast<py::ssize_t>(img.height()), static_cast<py::ssize_t>(img.width()), py::ssize_t{3}});
    std::ranges::copy(img.values(), out.mutable_data());
    return out;
}

ContextMap contextFrom(const F32& a)
{
    if (a.ndim() != 2) {
        throw py::value_error("context array must have shape (H, W)");
    }
    return ContextMap(static_cast<std::size_t>(a.shape(0)), static_cast<std::size_t>(a.shape(1)),
                      std::vector<float>(a.data(), a.data() + a.size()));
}

F32 contextTo(const ContextMap& ctx)
{
    F32 out({static_cast<py::ssize_t>(ctx.height()), static_cast<py::ssize_t>(ctx.width())});
    std::ranges::copy(ctx.values(), out.mutable_data());
    return out;
}

} // namespace

PYBIND11_MODULE(_core, m)
{
    m.doc() = "Context-aware 4D LUT engine";

    py::register_exception<Error>(m, "SalutError", PyExc_RuntimeError);

    m.def("identity_lut4d", [](std::size_t size, std::size_t bins) { return lutTo(make_identity_lut4d(size, bins)); },
          py::arg("size"), py::arg("bins"));
    m.def(
        "quad_interp",
        [](const F64& lut, double gamma, double r, double g, double b) {
            return quad_interp(lutFrom(lut), gamma, r, g, b);
        },
        py::arg("lut"), py::arg("gamma"), py::arg("r"), py::arg("g"), py::arg("b"));
    m.def(
        "apply_lut4d",
        [](const F64& lut, const F32& image, const F32& context, std::size_t threads) {
            const Lut4D l = lutFrom(lut);
            const ImageBuffer img = imageFrom(image);
            const ContextMap ctx = contextFrom(context);
            ImageBuffer out;
            {
                py::gil_scoped_release release;
                out = apply_lut4d(l, img, ctx, threads);
            }
            return imageTo(out);
        },
        py::arg("lut"), py::arg("image"), py::arg("context"), py::arg("threads") = 0);
    m.def(
        "luminance_context",
        [](const F32& image, int radius) { return contextTo(luminance_context(imageFrom(image), radius)); },
        py::arg("image"), py::arg("radius") = 8);

    m.def("loss_tv", [](const F64& lut) { return fit::loss_tv(lutFrom(lut)); });
    m.def("loss_mn", [](const F64& lut) { return fit::loss_mn(lutFrom(lut)); });
    m.def(
        "gradcheck",
        [](std::uint64_t seed, std::size_t coords) {
            const fit::GradCheckSuite s = fit::run_gradcheck_suite(seed, coords);
            return py::dict(py::arg("lut_entries") = s.lutEntries.maxRelError,
                            py::arg("alpha") = s.alpha.maxRelError, py::arg("passed") = s.passed());
        },
        py::arg("seed") = 1, py::arg("coords") = 100);

    m.def("psnr", [](const F32& a, const F32& b) { return metrics::psnr(imageFrom(a), imageFrom(b)); });
    m.def("ssim", [](const F32& a, const F32& b) { return metrics::ssim(imageFrom(a), imageFrom(b)); });
    m.def("hist_corr", [](const F32& a, const F32& b) { return metrics::hist_corr(imageFrom(a), imageFrom(b)); });

    m.def("read_lut4d", [](const std::string& path) { return lutTo(io::read_lut4d(path)); });
    m.def("write_lut4d", [](const std::string& path, const F64& lut) { io::write_lut4d(path, lutFrom(lut)); });
    m.def("read_ppm", [](const std::string& path) { return imageTo(io::read_ppm(path)); });
    m.def("write_ppm", [](const std::string& path, const F32& image) { io::write_ppm(path, imageFrom(image)); });

    m.def(
        "run_cli",
        [](const std::vector<std::string>& args) {
            std::ostringstream out, err;
            const int code = cli::run_cli(args, out, err);
            return py::make_tuple(code, out.str(), err.str());
        },
        py::arg("args"), "Run a salut subcommand in-process; returns (exit_code, stdout, stderr).");
}
