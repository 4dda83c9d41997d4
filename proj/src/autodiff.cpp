#include "fdm/nn/autodiff.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <unordered_set>

namespace fdm::nn {

namespace {

void ensure_grad(Node& n) {
    if (n.grad.data.empty()) n.grad = Tensor::zeros_like(n.val);
}

Value make_op(Tensor val, std::vector<Value> parents, std::function<void(Node&)> back) {
    auto n = std::make_shared<Node>();
    n->val = std::move(val);
    n->parents = std::move(parents);
    for (const auto& p : n->parents) {
        if (p->needs_grad) {
            n->needs_grad = true;
            break;
        }
    }
    if (n->needs_grad) n->backward_fn = std::move(back);
    return n;
}

void check_same_shape(const Value& a, const Value& b, const char* op) {
    if (!a->val.same_shape(b->val)) {
        throw std::invalid_argument(std::string(op) + ": shape mismatch " + shape_str(a->val) +
                                    " vs " + shape_str(b->val));
    }
}

}  // namespace

Value constant(Tensor v) {
    auto n = std::make_shared<Node>();
    n->val = std::move(v);
    return n;
}

Value parameter(Tensor v) {
    auto n = std::make_shared<Node>();
    n->val = std::move(v);
    n->is_param = true;
    n->needs_grad = true;
    ensure_grad(*n);
    return n;
}

void backward(const Value& loss) {
    if (loss->val.numel() != 1) {
        throw std::invalid_argument("backward: loss must be scalar, got " + shape_str(loss->val));
    }
    // iterative DFS topological order over grad-relevant nodes
    std::vector<Node*> order;
    std::unordered_set<Node*> visited;
    std::vector<std::pair<Node*, std::size_t>> stack;
    if (loss->needs_grad) stack.emplace_back(loss.get(), 0);
    while (!stack.empty()) {
        auto& [node, idx] = stack.back();
        if (idx == 0 && visited.count(node)) {
            stack.pop_back();
            continue;
        }
        if (idx < node->parents.size()) {
            Node* p = node->parents[idx].get();
            ++idx;
            if (p->needs_grad && !visited.count(p)) stack.emplace_back(p, 0);
        } else {
            if (!visited.count(node)) {
                visited.insert(node);
                order.push_back(node);
            }
            stack.pop_back();
        }
    }
    ensure_grad(*loss);
    loss->grad.data[0] += 1.0;
    for (auto it = order.rbegin(); it != order.rend(); ++it) {
        Node* n = *it;
        if (n->backward_fn) {
            for (const auto& p : n->parents) {
                if (p->needs_grad) ensure_grad(*p);
            }
            n->backward_fn(*n);
        }
    }
}

void zero_grad(std::span<const Value> params) {
    for (const auto& p : params) {
        ensure_grad(*p);
        std::fill(p->grad.data.begin(), p->grad.data.end(), 0.0);
    }
}

Value add(const Value& a, const Value& b) {
    check_same_shape(a, b, "add");
    Tensor out = a->val;
    for (std::size_t i = 0; i < out.data.size(); ++i) out.data[i] += b->val.data[i];
    return make_op(std::move(out), {a, b}, [](Node& n) {
        for (int s = 0; s < 2; ++s) {
            Node& p = *n.parents[static_cast<std::size_t>(s)];
            if (!p.needs_grad) continue;
            for (std::size_t i = 0; i < n.grad.data.size(); ++i) p.grad.data[i] += n.grad.data[i];
        }
    });
}

Value sub(const Value& a, const Value& b) {
    check_same_shape(a, b, "sub");
    Tensor out = a->val;
    for (std::size_t i = 0; i < out.data.size(); ++i) out.data[i] -= b->val.data[i];
    return make_op(std::move(out), {a, b}, [](Node& n) {
        Node& pa = *n.parents[0];
        Node& pb = *n.parents[1];
        if (pa.needs_grad) {
            for (std::size_t i = 0; i < n.grad.data.size(); ++i) pa.grad.data[i] += n.grad.data[i];
        }
        if (pb.needs_grad) {
            for (std::size_t i = 0; i < n.grad.data.size(); ++i) pb.grad.data[i] -= n.grad.data[i];
        }
    });
}

Value mul(const Value& a, const Value& b) {
    check_same_shape(a, b, "mul");
    Tensor out = a->val;
    for (std::size_t i = 0; i < out.data.size(); ++i) out.data[i] *= b->val.data[i];
    return make_op(std::move(out), {a, b}, [](Node& n) {
        Node& pa = *n.parents[0];
        Node& pb = *n.parents[1];
        if (pa.needs_grad) {
            for (std::size_t i = 0; i < n.grad.data.size(); ++i) {
                pa.grad.data[i] += n.grad.data[i] * pb.val.data[i];
            }
        }
        if (pb.needs_grad) {
            for (std::size_t i = 0; i < n.grad.data.size(); ++i) {
                pb.grad.data[i] += n.grad.data[i] * pa.val.data[i];
            }
        }
    });
}

Value scale(const Value& a, double c) {
    Tensor out = a->val;
    for (auto& v : out.data) v *= c;
    return make_op(std::move(out), {a}, [c](Node& n) {
        Node& p = *n.parents[0];
        for (std::size_t i = 0; i < n.grad.data.size(); ++i) p.grad.data[i] += c * n.grad.data[i];
    });
}

Value matmul(const Value& a, const Value& b) {
    if (a->val.ndim() != 2 || b->val.ndim() != 2 || a->val.dim(1) != b->val.dim(0)) {
        throw std::invalid_argument("matmul: incompatible shapes " + shape_str(a->val) + " and " +
                                    shape_str(b->val));
    }
    const int m = a->val.dim(0), k = a->val.dim(1), n = b->val.dim(1);
    Tensor out({m, n});
    for (int i = 0; i < m; ++i) {
        for (int l = 0; l < k; ++l) {
            const double av = a->val.at2(i, l);
            if (av == 0.0) continue;
            for (int j = 0; j < n; ++j) out.at2(i, j) += av * b->val.at2(l, j);
        }
    }
    return make_op(std::move(out), {a, b}, [m, k, n](Node& nd) {
        Node& pa = *nd.parents[0];
        Node& pb = *nd.parents[1];
        if (pa.needs_grad) {  // dA = dOut * B^T
            for (int i = 0; i < m; ++i) {
                for (int j = 0; j < n; ++j) {
                    const double g = nd.grad.at2(i, j);
                    if (g == 0.0) continue;
                    for (int l = 0; l < k; ++l) pa.grad.at2(i, l) += g * pb.val.at2(l, j);
                }
            }
        }
        if (pb.needs_grad) {  // dB = A^T * dOut
            for (int i = 0; i < m; ++i) {
                for (int l = 0; l < k; ++l) {
                    const double av = pa.val.at2(i, l);
                    if (av == 0.0) continue;
                    for (int j = 0; j < n; ++j) pb.grad.at2(l, j) += av * nd.grad.at2(i, j);
                }
            }
        }
    });
}

double sigmoid_scalar(double x) {
    if (x >= 0.0) {
        return 1.0 / (1.0 + std::exp(-x));
    }
    const double e = std::exp(x);
    return e / (1.0 + e);
}

Value sigmoid(const Value& a) {
    Tensor out = a->val;
    for (auto& v : out.data) v = sigmoid_scalar(v);
    Tensor saved = out;
    return make_op(std::move(out), {a}, [saved](Node& n) {
        Node& p = *n.parents[0];
        for (std::size_t i = 0; i < n.grad.data.size(); ++i) {
            const double s = saved.data[i];
            p.grad.data[i] += n.grad.data[i] * s * (1.0 - s);
        }
    });
}

Value tanh_act(const Value& a) {
    Tensor out = a->val;
    for (auto& v : out.data) v = std::tanh(v);
    Tensor saved = out;
    return make_op(std::move(out), {a}, [saved](Node& n) {
        Node& p = *n.parents[0];
        for (std::size_t i = 0; i < n.grad.data.size(); ++i) {
            const double t = saved.data[i];
            p.grad.data[i] += n.grad.data[i] * (1.0 - t * t);
        }
    });
}

Value relu(const Value& a) {
    Tensor out = a->val;
    for (auto& v : out.data) v = v > 0.0 ? v : 0.0;
    return make_op(std::move(out), {a}, [](Node& n) {
        Node& p = *n.parents[0];
        for (std::size_t i = 0; i < n.grad.data.size(); ++i) {
            if (p.val.data[i] > 0.0) p.grad.data[i] += n.grad.data[i];
        }
    });
}

Value conv2d(const Value& x, const Value& w, const Value& b, int pad) {
    if (x->val.ndim() != 3 || w->val.ndim() != 4) {
        throw std::invalid_argument("conv2d: expects x[H,W,C], w[kh,kw,C,F]");
    }
    const int h = x->val.dim(0), wd = x->val.dim(1), cin = x->val.dim(2);
    const int kh = w->val.dim(0), kw = w->val.dim(1), f = w->val.dim(3);
    if (w->val.dim(2) != cin) throw std::invalid_argument("conv2d: channel mismatch");
    if (b->val.numel() != f) throw std::invalid_argument("conv2d: bias size mismatch");
    const int oh = h + 2 * pad - kh + 1;
    const int ow = wd + 2 * pad - kw + 1;
    if (oh < 1 || ow < 1) throw std::invalid_argument("conv2d: kernel larger than padded input");

    Tensor out({oh, ow, f});
    for (int oy = 0; oy < oh; ++oy) {
        for (int ox = 0; ox < ow; ++ox) {
            double* acc = &out.data[(static_cast<std::size_t>(oy) * ow + ox) * f];
            for (int j = 0; j < f; ++j) acc[j] = b->val.data[static_cast<std::size_t>(j)];
            for (int ky = 0; ky < kh; ++ky) {
                const int iy = oy + ky - pad;
                if (iy < 0 || iy >= h) continue;
                for (int kx = 0; kx < kw; ++kx) {
                    const int ix = ox + kx - pad;
                    if (ix < 0 || ix >= wd) continue;
                    const double* xi = &x->val.data[(static_cast<std::size_t>(iy) * wd + ix) * cin];
                    const double* wr =
                        &w->val.data[(static_cast<std::size_t>(ky) * kw + kx) * cin * f];
                    for (int c = 0; c < cin; ++c) {
                        const double xv = xi[c];
                        if (xv == 0.0) continue;
                        const double* wc = wr + static_cast<std::size_t>(c) * f;
                        for (int j = 0; j < f; ++j) acc[j] += xv * wc[j];
                    }
                }
            }
        }
    }
    return make_op(std::move(out), {x, w, b}, [h, wd, cin, kh, kw, f, pad, oh, ow](Node& n) {
        Node& px = *n.parents[0];
        Node& pw = *n.parents[1];
        Node& pb = *n.parents[2];
        for (int oy = 0; oy < oh; ++oy) {
            for (int ox = 0; ox < ow; ++ox) {
                const double* g = &n.grad.data[(static_cast<std::size_t>(oy) * ow + ox) * f];
                if (pb.needs_grad) {
                    for (int j = 0; j < f; ++j) pb.grad.data[static_cast<std::size_t>(j)] += g[j];
                }
                for (int ky = 0; ky < kh; ++ky) {
                    const int iy = oy + ky - pad;
                    if (iy < 0 || iy >= h) continue;
                    for (int kx = 0; kx < kw; ++kx) {
                        const int ix = ox + kx - pad;
                        if (ix < 0 || ix >= wd) continue;
                        const std::size_t xoff = (static_cast<std::size_t>(iy) * wd + ix) * cin;
                        const std::size_t woff =
                            (static_cast<std::size_t>(ky) * kw + kx) * cin * f;
                        if (pw.needs_grad) {
                            for (int c = 0; c < cin; ++c) {
                                const double xv = px.val.data[xoff + static_cast<std::size_t>(c)];
                                if (xv == 0.0) continue;
                                double* wg = &pw.grad.data[woff + static_cast<std::size_t>(c) * f];
                                for (int j = 0; j < f; ++j) wg[j] += xv * g[j];
                            }
                        }
                        if (px.needs_grad) {
                            for (int c = 0; c < cin; ++c) {
                                const double* wc =
                                    &pw.val.data[woff + static_cast<std::size_t>(c) * f];
                                double acc = 0.0;
                                for (int j = 0; j < f; ++j) acc += wc[j] * g[j];
                                px.grad.data[xoff + static_cast<std::size_t>(c)] += acc;
                            }
                        }
                    }
                }
            }
        }
    });
}

Value maxpool2d(const Value& x, int size, int stride) {
    if (x->val.ndim() != 3) throw std::invalid_argument("maxpool2d: expects [H,W,C]");
    const int h = x->val.dim(0), w = x->val.dim(1), c = x->val.dim(2);
    const int oh = (h - size) / stride + 1;
    const int ow = (w - size) / stride + 1;
    if (oh < 1 || ow < 1) throw std::invalid_argument("maxpool2d: window larger than input");
    Tensor out({oh, ow, c});
    auto argmax = std::make_shared<std::vector<std::size_t>>(out.data.size());
    for (int oy = 0; oy < oh; ++oy) {
        for (int ox = 0; ox < ow; ++ox) {
            for (int ch = 0; ch < c; ++ch) {
                double best = -std::numeric_limits<double>::infinity();
                std::size_t best_idx = 0;
                for (int ky = 0; ky < size; ++ky) {
                    for (int kx = 0; kx < size; ++kx) {
                        const std::size_t idx =
                            (static_cast<std::size_t>(oy * stride + ky) * w + (ox * stride + kx)) *
                                c +
                            static_cast<std::size_t>(ch);
                        if (x->val.data[idx] > best) {
                            best = x->val.data[idx];
                            best_idx = idx;
                        }
                    }
                }
                const std::size_t oidx =
                    (static_cast<std::size_t>(oy) * ow + ox) * c + static_cast<std::size_t>(ch);
                out.data[oidx] = best;
                (*argmax)[oidx] = best_idx;
            }
        }
    }
    return make_op(std::move(out), {x}, [argmax](Node& n) {
        Node& p = *n.parents[0];
        for (std::size_t i = 0; i < n.grad.data.size(); ++i) {
            p.grad.data[(*argmax)[i]] += n.grad.data[i];
        }
    });
}

Value batchnorm2d(const Value& x, const Value& gamma, const Value& beta, double eps) {
    if (x->val.ndim() != 3) throw std::invalid_argument("batchnorm2d: expects [H,W,C]");
    const int h = x->val.dim(0), w = x->val.dim(1), c = x->val.dim(2);
    if (gamma->val.numel() != c || beta->val.numel() != c) {
        throw std::invalid_argument("batchnorm2d: gamma/beta size mismatch");
    }
    const long n_px = static_cast<long>(h) * w;
    auto mean = std::make_shared<std::vector<double>>(static_cast<std::size_t>(c), 0.0);
    auto inv_std = std::make_shared<std::vector<double>>(static_cast<std::size_t>(c), 0.0);
    for (int ch = 0; ch < c; ++ch) {
        double m = 0.0;
        for (long i = 0; i < n_px; ++i) m += x->val.data[static_cast<std::size_t>(i) * c + ch];
        m /= static_cast<double>(n_px);
        double var = 0.0;
        for (long i = 0; i < n_px; ++i) {
            const double d = x->val.data[static_cast<std::size_t>(i) * c + ch] - m;
            var += d * d;
        }
        var /= static_cast<double>(n_px);
        (*mean)[static_cast<std::size_t>(ch)] = m;
        (*inv_std)[static_cast<std::size_t>(ch)] = 1.0 / std::sqrt(var + eps);
    }
    Tensor out({h, w, c});
    for (long i = 0; i < n_px; ++i) {
        for (int ch = 0; ch < c; ++ch) {
            const std::size_t idx = static_cast<std::size_t>(i) * c + ch;
            const double xhat = (x->val.data[idx] - (*mean)[static_cast<std::size_t>(ch)]) *
                                (*inv_std)[static_cast<std::size_t>(ch)];
            out.data[idx] = gamma->val.data[static_cast<std::size_t>(ch)] * xhat +
                            beta->val.data[static_cast<std::size_t>(ch)];
        }
    }
    return make_op(std::move(out), {x, gamma, beta}, [h, w, c, mean, inv_std, n_px](Node& n) {
        Node& px = *n.parents[0];
        Node& pg = *n.parents[1];
        Node& pb2 = *n.parents[2];
        for (int ch = 0; ch < c; ++ch) {
            const double m = (*mean)[static_cast<std::size_t>(ch)];
            const double is = (*inv_std)[static_cast<std::size_t>(ch)];
            const double g = pg.val.data[static_cast<std::size_t>(ch)];
            // accumulate the reductions first
            double sum_dy = 0.0, sum_dy_xhat = 0.0;
            for (long i = 0; i < n_px; ++i) {
                const std::size_t idx = static_cast<std::size_t>(i) * c + ch;
                const double dy = n.grad.data[idx];
                const double xhat = (px.val.data[idx] - m) * is;
                sum_dy += dy;
                sum_dy_xhat += dy * xhat;
            }
            if (pg.needs_grad) pg.grad.data[static_cast<std::size_t>(ch)] += sum_dy_xhat;
            if (pb2.needs_grad) pb2.grad.data[static_cast<std::size_t>(ch)] += sum_dy;
            if (px.needs_grad) {
                const double inv_n = 1.0 / static_cast<double>(n_px);
                for (long i = 0; i < n_px; ++i) {
                    const std::size_t idx = static_cast<std::size_t>(i) * c + ch;
                    const double dy = n.grad.data[idx];
                    const double xhat = (px.val.data[idx] - m) * is;
                    px.grad.data[idx] +=
                        g * is * (dy - inv_n * sum_dy - xhat * inv_n * sum_dy_xhat);
                }
            }
        }
    });
}

Value channel_mean(const Value& x) {
    if (x->val.ndim() != 3) throw std::invalid_argument("channel_mean: expects [H,W,C]");
    const int h = x->val.dim(0), w = x->val.dim(1), c = x->val.dim(2);
    Tensor out({h, w, 1});
    for (long i = 0; i < static_cast<long>(h) * w; ++i) {
        double m = 0.0;
        for (int ch = 0; ch < c; ++ch) m += x->val.data[static_cast<std::size_t>(i) * c + ch];
        out.data[static_cast<std::size_t>(i)] = m / c;
    }
    return make_op(std::move(out), {x}, [h, w, c](Node& n) {
        Node& p = *n.parents[0];
        const double inv_c = 1.0 / c;
        for (long i = 0; i < static_cast<long>(h) * w; ++i) {
            const double g = n.grad.data[static_cast<std::size_t>(i)] * inv_c;
            for (int ch = 0; ch < c; ++ch) p.grad.data[static_cast<std::size_t>(i) * c + ch] += g;
        }
    });
}

Value channel_max(const Value& x) {
    if (x->val.ndim() != 3) throw std::invalid_argument("channel_max: expects [H,W,C]");
    const int h = x->val.dim(0), w = x->val.dim(1), c = x->val.dim(2);
    Tensor out({h, w, 1});
    auto argmax = std::make_shared<std::vector<int>>(static_cast<std::size_t>(h) * w, 0);
    for (long i = 0; i < static_cast<long>(h) * w; ++i) {
        double best = -std::numeric_limits<double>::infinity();
        int best_ch = 0;
        for (int ch = 0; ch < c; ++ch) {
            const double v = x->val.data[static_cast<std::size_t>(i) * c + ch];
            if (v > best) {
                best = v;
                best_ch = ch;
            }
        }
        out.data[static_cast<std::size_t>(i)] = best;
        (*argmax)[static_cast<std::size_t>(i)] = best_ch;
    }
    return make_op(std::move(out), {x}, [h, w, c, argmax](Node& n) {
        Node& p = *n.parents[0];
        for (long i = 0; i < static_cast<long>(h) * w; ++i) {
            p.grad.data[static_cast<std::size_t>(i) * c +
                        static_cast<std::size_t>((*argmax)[static_cast<std::size_t>(i)])] +=
                n.grad.data[static_cast<std::size_t>(i)];
        }
    });
}

Value concat_channels(const Value& a, const Value& b) {
    if (a->val.ndim() != 3 || b->val.ndim() != 3 || a->val.dim(0) != b->val.dim(0) ||
        a->val.dim(1) != b->val.dim(1)) {
        throw std::invalid_argument("concat_channels: spatial shape mismatch");
    }
    const int h = a->val.dim(0), w = a->val.dim(1), ca = a->val.dim(2), cb = b->val.dim(2);
    Tensor out({h, w, ca + cb});
    for (long i = 0; i < static_cast<long>(h) * w; ++i) {
        for (int ch = 0; ch < ca; ++ch) {
            out.data[static_cast<std::size_t>(i) * (ca + cb) + ch] =
                a->val.data[static_cast<std::size_t>(i) * ca + ch];
        }
        for (int ch = 0; ch < cb; ++ch) {
            out.data[static_cast<std::size_t>(i) * (ca + cb) + ca + ch] =
                b->val.data[static_cast<std::size_t>(i) * cb + ch];
        }
    }
    return make_op(std::move(out), {a, b}, [h, w, ca, cb](Node& n) {
        Node& pa = *n.parents[0];
        Node& pb = *n.parents[1];
        for (long i = 0; i < static_cast<long>(h) * w; ++i) {
            if (pa.needs_grad) {
                for (int ch = 0; ch < ca; ++ch) {
                    pa.grad.data[static_cast<std::size_t>(i) * ca + ch] +=
                        n.grad.data[static_cast<std::size_t>(i) * (ca + cb) + ch];
                }
            }
            if (pb.needs_grad) {
                for (int ch = 0; ch < cb; ++ch) {
                    pb.grad.data[static_cast<std::size_t>(i) * cb + ch] +=
                        n.grad.data[static_cast<std::size_t>(i) * (ca + cb) + ca + ch];
                }
            }
        }
    });
}

Value mul_channel_broadcast(const Value& x, const Value& m) {
    if (x->val.ndim() != 3 || m->val.ndim() != 3 || m->val.dim(2) != 1 ||
        x->val.dim(0) != m->val.dim(0) || x->val.dim(1) != m->val.dim(1)) {
        throw std::invalid_argument("mul_channel_broadcast: expects x[H,W,C], m[H,W,1]");
    }
    const int h = x->val.dim(0), w = x->val.dim(1), c = x->val.dim(2);
    Tensor out({h, w, c});
    for (long i = 0; i < static_cast<long>(h) * w; ++i) {
        const double mv = m->val.data[static_cast<std::size_t>(i)];
        for (int ch = 0; ch < c; ++ch) {
            out.data[static_cast<std::size_t>(i) * c + ch] =
                x->val.data[static_cast<std::size_t>(i) * c + ch] * mv;
        }
    }
    return make_op(std::move(out), {x, m}, [h, w, c](Node& n) {
        Node& px = *n.parents[0];
        Node& pm = *n.parents[1];
        for (long i = 0; i < static_cast<long>(h) * w; ++i) {
            const double mv = pm.val.data[static_cast<std::size_t>(i)];
            double acc = 0.0;
            for (int ch = 0; ch < c; ++ch) {
                const std::size_t idx = static_cast<std::size_t>(i) * c + ch;
                if (px.needs_grad) px.grad.data[idx] += n.grad.data[idx] * mv;
                acc += n.grad.data[idx] * px.val.data[idx];
            }
            if (pm.needs_grad) pm.grad.data[static_cast<std::size_t>(i)] += acc;
        }
    });
}

Value flatten(const Value& x) {
    Tensor out({static_cast<int>(x->val.numel()), 1});
    out.data = x->val.data;
    return make_op(std::move(out), {x}, [](Node& n) {
        Node& p = *n.parents[0];
        for (std::size_t i = 0; i < n.grad.data.size(); ++i) p.grad.data[i] += n.grad.data[i];
    });
}

Value conv1d(const Value& x, const Value& w, const Value& b, int pad) {
    if (x->val.ndim() != 2 || w->val.ndim() != 3) {
        throw std::invalid_argument("conv1d: expects x[T,C], w[kw,C,F]");
    }
    const int t = x->val.dim(0), cin = x->val.dim(1);
    const int kw = w->val.dim(0), f = w->val.dim(2);
    if (w->val.dim(1) != cin) throw std::invalid_argument("conv1d: channel mismatch");
    if (b->val.numel() != f) throw std::invalid_argument("conv1d: bias size mismatch");
    const int ot = t + 2 * pad - kw + 1;
    if (ot < 1) throw std::invalid_argument("conv1d: kernel larger than padded input");
    Tensor out({ot, f});
    for (int o = 0; o < ot; ++o) {
        double* acc = &out.data[static_cast<std::size_t>(o) * f];
        for (int j = 0; j < f; ++j) acc[j] = b->val.data[static_cast<std::size_t>(j)];
        for (int k = 0; k < kw; ++k) {
            const int i = o + k - pad;
            if (i < 0 || i >= t) continue;
            const double* xi = &x->val.data[static_cast<std::size_t>(i) * cin];
            const double* wr = &w->val.data[static_cast<std::size_t>(k) * cin * f];
            for (int c = 0; c < cin; ++c) {
                const double xv = xi[c];
                if (xv == 0.0) continue;
                const double* wc = wr + static_cast<std::size_t>(c) * f;
                for (int j = 0; j < f; ++j) acc[j] += xv * wc[j];
            }
        }
    }
    return make_op(std::move(out), {x, w, b}, [t, cin, kw, f, pad, ot](Node& n) {
        Node& px = *n.parents[0];
        Node& pw = *n.parents[1];
        Node& pb = *n.parents[2];
        for (int o = 0; o < ot; ++o) {
            const double* g = &n.grad.data[static_cast<std::size_t>(o) * f];
            if (pb.needs_grad) {
                for (int j = 0; j < f; ++j) pb.grad.data[static_cast<std::size_t>(j)] += g[j];
            }
            for (int k = 0; k < kw; ++k) {
                const int i = o + k - pad;
                if (i < 0 || i >= t) continue;
                const std::size_t xoff = static_cast<std::size_t>(i) * cin;
                const std::size_t woff = static_cast<std::size_t>(k) * cin * f;
                for (int c = 0; c < cin; ++c) {
                    if (pw.needs_grad) {
                        const double xv = px.val.data[xoff + static_cast<std::size_t>(c)];
                        if (xv != 0.0) {
                            double* wg = &pw.grad.data[woff + static_cast<std::size_t>(c) * f];
                            for (int j = 0; j < f; ++j) wg[j] += xv * g[j];
                        }
                    }
                    if (px.needs_grad) {
                        const double* wc = &pw.val.data[woff + static_cast<std::size_t>(c) * f];
                        double acc = 0.0;
                        for (int j = 0; j < f; ++j) acc += wc[j] * g[j];
                        px.grad.data[xoff + static_cast<std::size_t>(c)] += acc;
                    }
                }
            }
        }
    });
}

Value depthwise_conv1d(const Value& x, const Value& w, const Value& b, int pad) {
    if (x->val.ndim() != 2 || w->val.ndim() != 2 || w->val.dim(1) != x->val.dim(1)) {
        throw std::invalid_argument("depthwise_conv1d: expects x[T,C], w[kw,C]");
    }
    const int t = x->val.dim(0), c = x->val.dim(1), kw = w->val.dim(0);
    if (b->val.numel() != c) throw std::invalid_argument("depthwise_conv1d: bias size mismatch");
    const int ot = t + 2 * pad - kw + 1;
    if (ot < 1) throw std::invalid_argument("depthwise_conv1d: kernel larger than padded input");
    Tensor out({ot, c});
    for (int o = 0; o < ot; ++o) {
        for (int ch = 0; ch < c; ++ch) {
            double acc = b->val.data[static_cast<std::size_t>(ch)];
            for (int k = 0; k < kw; ++k) {
                const int i = o + k - pad;
                if (i < 0 || i >= t) continue;
                acc += x->val.at2(i, ch) * w->val.at2(k, ch);
            }
            out.at2(o, ch) = acc;
        }
    }
    return make_op(std::move(out), {x, w, b}, [t, c, kw, pad, ot](Node& n) {
        Node& px = *n.parents[0];
        Node& pw = *n.parents[1];
        Node& pb = *n.parents[2];
        for (int o = 0; o < ot; ++o) {
            for (int ch = 0; ch < c; ++ch) {
                const double g = n.grad.at2(o, ch);
                if (g == 0.0) continue;
                if (pb.needs_grad) pb.grad.data[static_cast<std::size_t>(ch)] += g;
                for (int k = 0; k < kw; ++k) {
                    const int i = o + k - pad;
                    if (i < 0 || i >= t) continue;
                    if (pw.needs_grad) pw.grad.at2(k, ch) += g * px.val.at2(i, ch);
                    if (px.needs_grad) px.grad.at2(i, ch) += g * pw.val.at2(k, ch);
                }
            }
        }
    });
}

Value select_row(const Value& x, int t) {
    if (x->val.ndim() != 2) throw std::invalid_argument("select_row: expects [T,C]");
    if (t < 0 || t >= x->val.dim(0)) throw std::invalid_argument("select_row: index out of range");
    const int c = x->val.dim(1);
    Tensor out({c, 1});
    for (int ch = 0; ch < c; ++ch) out.data[static_cast<std::size_t>(ch)] = x->val.at2(t, ch);
    return make_op(std::move(out), {x}, [t, c](Node& n) {
        Node& p = *n.parents[0];
        for (int ch = 0; ch < c; ++ch) {
            p.grad.at2(t, ch) += n.grad.data[static_cast<std::size_t>(ch)];
        }
    });
}

Value concat_vec(const Value& a, const Value& b) {
    if (a->val.ndim() != 2 || b->val.ndim() != 2 || a->val.dim(1) != 1 || b->val.dim(1) != 1) {
        throw std::invalid_argument("concat_vec: expects column vectors");
    }
    const int m = a->val.dim(0), n2 = b->val.dim(0);
    Tensor out({m + n2, 1});
    for (int i = 0; i < m; ++i) out.data[static_cast<std::size_t>(i)] = a->val.data[static_cast<std::size_t>(i)];
    for (int i = 0; i < n2; ++i) {
        out.data[static_cast<std::size_t>(m + i)] = b->val.data[static_cast<std::size_t>(i)];
    }
    return make_op(std::move(out), {a, b}, [m, n2](Node& n) {
        Node& pa = *n.parents[0];
        Node& pb = *n.parents[1];
        if (pa.needs_grad) {
            for (int i = 0; i < m; ++i) {
                pa.grad.data[static_cast<std::size_t>(i)] += n.grad.data[static_cast<std::size_t>(i)];
            }
        }
        if (pb.needs_grad) {
            for (int i = 0; i < n2; ++i) {
                pb.grad.data[static_cast<std::size_t>(i)] +=
                    n.grad.data[static_cast<std::size_t>(m + i)];
            }
        }
    });
}

Tensor softmax(const Tensor& logits) {
    Tensor out = logits;
    double mx = -std::numeric_limits<double>::infinity();
    for (double v : out.data) mx = std::max(mx, v);
    double sum = 0.0;
    for (auto& v : out.data) {
        v = std::exp(v - mx);
        sum += v;
    }
    for (auto& v : out.data) v /= sum;
    return out;
}

Value softmax_cross_entropy(const Value& logits, int label) {
    const long n = logits->val.numel();
    if (label < 0 || label >= n) throw std::invalid_argument("softmax_cross_entropy: bad label");
    Tensor probs = softmax(logits->val);
    Tensor out({1, 1});
    out.data[0] = -std::log(std::max(probs.data[static_cast<std::size_t>(label)], 1e-300));
    auto saved = std::make_shared<Tensor>(std::move(probs));
    return make_op(std::move(out), {logits}, [saved, label](Node& nd) {
        Node& p = *nd.parents[0];
        const double g = nd.grad.data[0];
        for (std::size_t i = 0; i < p.grad.data.size(); ++i) {
            const double one_hot = static_cast<long>(i) == label ? 1.0 : 0.0;
            p.grad.data[i] += g * (saved->data[i] - one_hot);
        }
    });
}

Value mse_loss(const Value& pred, const Tensor& target) {
    if (!pred->val.same_shape(target)) {
        throw std::invalid_argument("mse_loss: shape mismatch");
    }
    const double inv_n = 1.0 / static_cast<double>(pred->val.numel());
    Tensor out({1, 1});
    double acc = 0.0;
    for (std::size_t i = 0; i < pred->val.data.size(); ++i) {
        const double d = pred->val.data[i] - target.data[i];
        acc += d * d;
    }
    out.data[0] = acc * inv_n;
    auto saved = std::make_shared<Tensor>(target);
    return make_op(std::move(out), {pred}, [saved, inv_n](Node& nd) {
        Node& p = *nd.parents[0];
        const double g = nd.grad.data[0];
        for (std::size_t i = 0; i < p.grad.data.size(); ++i) {
            p.grad.data[i] += g * 2.0 * inv_n * (p.val.data[i] - saved->data[i]);
        }
    });
}

}  // namespace fdm::nn
