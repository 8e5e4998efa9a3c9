#include "needle/space.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <random>
#include <sstream>

namespace needle {

double DiscreteSpace::diameter() const {
    double m = 0.0;
    for (double v : dist) m = std::max(m, v);
    return m;
}

double DiscreteSpace::mesh() const {
    const int n = size();
    double worst = 0.0;
    for (int i = 0; i < n; ++i) {
        double nn = std::numeric_limits<double>::infinity();
        const double* r = row(i);
        for (int j = 0; j < n; ++j)
            if (j != i) nn = std::min(nn, r[j]);
        if (std::isfinite(nn)) worst = std::max(worst, nn);
    }
    return worst;
}

double DiscreteSpace::totalMass() const {
    double s = 0.0;
    for (double w : weight) s += w;
    return s;
}

void DiscreteSpace::validate(double tol, unsigned long long seed) const {
    const int n = size();
    require(n >= 1, ErrorKind::InvalidParameter, "space has no points");
    require(dist.size() == static_cast<size_t>(n) * n, ErrorKind::InvalidParameter, "distance matrix size mismatch");
    for (double w : weight) require(w > 0.0, ErrorKind::InvalidParameter, "weights must be positive");
    require(std::abs(totalMass() - 1.0) <= 1e-9, ErrorKind::InvalidParameter, "weights must sum to 1");
    for (int i = 0; i < n; ++i) {
        require(d(i, i) == 0.0, ErrorKind::InvalidParameter, "distance diagonal must vanish");
        for (int j = i + 1; j < n; ++j) {
            require(d(i, j) >= 0.0 && std::abs(d(i, j) - d(j, i)) <= tol, ErrorKind::InvalidParameter,
                    "distance matrix must be symmetric and nonnegative");
        }
    }
    auto check = [&](int i, int j, int k) {
        if (d(i, k) > d(i, j) + d(j, k) + tol)
            fail(ErrorKind::InvalidParameter, "triangle inequality violated at (" + std::to_string(i) + "," +
                                                  std::to_string(j) + "," + std::to_string(k) + ")");
    };
    if (n <= 400) {
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j)
                for (int k = 0; k < n; ++k) check(i, j, k);
    } else {
        std::mt19937_64 rng(seed);
        std::uniform_int_distribution<int> u(0, n - 1);
        for (int s = 0; s < 2000000; ++s) check(u(rng), u(rng), u(rng));
    }
}

DiscreteSpace DiscreteSpace::onSphere(std::vector<std::array<double, 3>> pts, std::vector<double> w) {
    DiscreteSpace X;
    const int n = static_cast<int>(pts.size());
    require(static_cast<int>(w.size()) == n, ErrorKind::InvalidParameter, "weights and points differ in count");
    for (auto& p : pts) {
        double r = std::sqrt(p[0] * p[0] + p[1] * p[1] + p[2] * p[2]);
        require(r > 0.0, ErrorKind::InvalidParameter, "sphere point at the origin");
        for (double& c : p) c /= r;
    }
    X.coords = std::move(pts);
    X.weight = std::move(w);
    X.ids.resize(n);
    for (int i = 0; i < n; ++i) X.ids[i] = i;
    X.dist.assign(static_cast<size_t>(n) * n, 0.0);
    for (int i = 0; i < n; ++i) {
        for (int j = i + 1; j < n; ++j) {
            const auto& a = X.coords[i];
            const auto& b = X.coords[j];
            double dot = a[0] * b[0] + a[1] * b[1] + a[2] * b[2];
            // atan2 form keeps accuracy near 0 and pi.
            double cx = a[1] * b[2] - a[2] * b[1], cy = a[2] * b[0] - a[0] * b[2], cz = a[0] * b[1] - a[1] * b[0];
            double ang = std::atan2(std::sqrt(cx * cx + cy * cy + cz * cz), dot);
            X.dist[static_cast<size_t>(i) * n + j] = ang;
            X.dist[static_cast<size_t>(j) * n + i] = ang;
        }
    }
    X.dim = 2;
    X.sphereMetric = true;
    return X;
}

DiscreteSpace DiscreteSpace::fromMatrix(std::vector<double> dist, std::vector<double> w, int dim) {
    DiscreteSpace X;
    const size_t n = w.size();
    require(dist.size() == n * n, ErrorKind::InvalidParameter, "distance matrix size mismatch");
    X.dist = std::move(dist);
    X.weight = std::move(w);
    X.ids.resize(n);
    for (size_t i = 0; i < n; ++i) X.ids[i] = static_cast<long>(i);
    X.dim = dim;
    return X;
}

std::string DiscreteSpace::toText() const {
    std::ostringstream os;
    char buf[160];
    const int n = size();
    os << n << "\n";
    if (dim != 2) os << "dim " << dim << "\n";
    for (int i = 0; i < n; ++i) {
        if (!coords.empty()) {
            std::snprintf(buf, sizeof buf, "%ld %.17g %.17g %.17g %.17g\n", ids[i], coords[i][0], coords[i][1],
                          coords[i][2], weight[i]);
        } else {
            std::snprintf(buf, sizeof buf, "%ld %.17g\n", ids[i], weight[i]);
        }
        os << buf;
    }
    if (sphereMetric) {
        os << "metric sphere-geodesic\n";
    } else {
        os << "metric explicit\n";
        for (int i = 1; i < n; ++i) {
            for (int j = 0; j < i; ++j) {
                std::snprintf(buf, sizeof buf, "%s%.17g", j ? " " : "", d(i, j));
                os << buf;
            }
            os << "\n";
        }
    }
    return os.str();
}

DiscreteSpace DiscreteSpace::fromText(const std::string& text) {
    std::istringstream is(text);
    std::string line;
    auto nextLine = [&](std::string& out) {
        while (std::getline(is, out)) {
            auto p = out.find_first_not_of(" \t\r");
            if (p == std::string::npos || out[p] == '#') continue;
            return true;
        }
        return false;
    };
    if (!nextLine(line)) fail(ErrorKind::Parse, "empty space file");
    long n = 0;
    try {
        n = std::stol(line);
    } catch (...) {
        fail(ErrorKind::Parse, "first line must be the point count");
    }
    require(n >= 1, ErrorKind::Parse, "point count must be positive");
    int dim = 2;
    std::vector<long> ids;
    std::vector<std::array<double, 3>> coords;
    std::vector<double> w;
    bool withCoords = false;
    for (long i = 0; i < n;) {
        if (!nextLine(line)) fail(ErrorKind::Parse, "missing point lines");
        std::istringstream ls(line);
        if (line.rfind("dim", 0) == 0) {
            std::string tag;
            ls >> tag >> dim;
            require(dim >= 1, ErrorKind::Parse, "dim must be >= 1");
            continue;
        }
        std::vector<double> tok;
        long id;
        if (!(ls >> id)) fail(ErrorKind::Parse, "point line must start with an id");
        double x;
        while (ls >> x) tok.push_back(x);
        if (tok.size() == 4) {
            if (i == 0) withCoords = true;
            require(withCoords, ErrorKind::Parse, "coordinates must be given for all points or none");
            coords.push_back({tok[0], tok[1], tok[2]});
            w.push_back(tok[3]);
        } else if (tok.size() == 1) {
            require(!withCoords, ErrorKind::Parse, "coordinates must be given for all points or none");
            w.push_back(tok[0]);
        } else {
            fail(ErrorKind::Parse, "point line must be `id x y z w` or `id w`");
        }
        ids.push_back(id);
        ++i;
    }
    if (!nextLine(line)) fail(ErrorKind::Parse, "missing metric line");
    DiscreteSpace X;
    if (line.find("sphere-geodesic") != std::string::npos) {
        require(withCoords, ErrorKind::Parse, "sphere-geodesic metric needs coordinates");
        X = onSphere(coords, w);
    } else if (line.find("explicit") != std::string::npos || line.find("metric") != std::string::npos) {
        std::vector<double> dm(static_cast<size_t>(n) * n, 0.0);
        for (long i = 1; i < n; ++i) {
            if (!nextLine(line)) fail(ErrorKind::Parse, "distance block truncated");
            std::istringstream ls(line);
            for (long j = 0; j < i; ++j) {
                double v;
                if (!(ls >> v)) fail(ErrorKind::Parse, "distance row " + std::to_string(i) + " too short");
                dm[i * n + j] = v;
                dm[j * n + i] = v;
            }
        }
        X = fromMatrix(std::move(dm), w, dim);
        if (withCoords) X.coords = coords;
    } else {
        fail(ErrorKind::Parse, "unknown metric line: " + line);
    }
    X.ids = ids;
    X.dim = dim;
    return X;
}

double maskMass(const DiscreteSpace& X, const Mask& E) {
    double s = 0.0;
    for (int i = 0; i < X.size(); ++i)
        if (E[i]) s += X.weight[i];
    return s;
}

}  // namespace needle
