#pragma once

#include <Eigen/Core>

namespace pqr::detail {

// Applies X (r x c) to the middle mode of a buffer laid out as pre x c x post
// (post fastest), writing pre x r x post. Each pre-slice is a post x c
// column-major block, so the product is a strided batch of GEMMs against X^T.
template <class Scalar>
void apply_mode_raw(const Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>& X,
                    Eigen::Index pre, Eigen::Index post, const Scalar* in, Scalar* out,
                    bool accumulate) {
    using Mat = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
    const Eigen::Index r = X.rows();
    const Eigen::Index c = X.cols();
    if (post == 1) {
        Eigen::Map<const Mat> in_m(in, c, pre);
        Eigen::Map<Mat> out_m(out, r, pre);
        if (accumulate)
            out_m.noalias() += X * in_m;
        else
            out_m.noalias() = X * in_m;
        return;
    }
    const Mat xt = X.transpose();
    for (Eigen::Index p = 0; p < pre; ++p) {
        Eigen::Map<const Mat> in_m(in + p * c * post, post, c);
        Eigen::Map<Mat> out_m(out + p * r * post, post, r);
        if (accumulate)
            out_m.noalias() += in_m * xt;
        else
            out_m.noalias() = in_m * xt;
    }
}

}  // namespace pqr::detail
