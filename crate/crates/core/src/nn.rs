//! Minimal differentiable-computation kernel.
//!
//! Dense layers, strided 2D convolution, activations, Adam, and a central
//! finite-difference oracle. The model zoo is closed-world (two small encoders
//! and one head), so every backward pass is hand-derived per layer instead of
//! going through a general autodiff graph.
//!
//! All computation is in `f64` and every reduction runs in a fixed order, so
//! repeated evaluations are bitwise identical. Backward functions *accumulate*
//! into the provided gradient slices; the Siamese sum over shared weights
//! falls out of calling them once per branch with the same buffers.

/// Errors from kernel operations.
#[derive(Debug, thiserror::Error, PartialEq)]
pub enum NnError {
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("numeric error: {0}")]
    NumericError(String),
}

/// `output = weights * input + bias`, with `weights` row-major `[out][in]`.
pub fn dense_forward(weights: &[f64], bias: &[f64], input: &[f64]) -> Result<Vec<f64>, NnError> {
    let out_dim = bias.len();
    let in_dim = input.len();
    if weights.len() != out_dim * in_dim {
        return Err(NnError::ShapeMismatch(format!(
            "dense weights {} != {out_dim}x{in_dim}",
            weights.len()
        )));
    }
    let mut output = Vec::with_capacity(out_dim);
    for o in 0..out_dim {
        let row = &weights[o * in_dim..(o + 1) * in_dim];
        let mut acc = bias[o];
        for (w, x) in row.iter().zip(input) {
            acc += w * x;
        }
        output.push(acc);
    }
    Ok(output)
}

/// Backward pass of [`dense_forward`]. Accumulates parameter gradients and
/// returns the gradient with respect to the input.
pub fn dense_backward(
    weights: &[f64],
    input: &[f64],
    upstream: &[f64],
    grad_weights: &mut [f64],
    grad_bias: &mut [f64],
) -> Vec<f64> {
    let in_dim = input.len();
    let out_dim = upstream.len();
    debug_assert_eq!(weights.len(), out_dim * in_dim);
    debug_assert_eq!(grad_weights.len(), out_dim * in_dim);
    debug_assert_eq!(grad_bias.len(), out_dim);
    let mut grad_input = vec![0.0; in_dim];
    for o in 0..out_dim {
        let g = upstream[o];
        grad_bias[o] += g;
        let row = &weights[o * in_dim..(o + 1) * in_dim];
        let grad_row = &mut grad_weights[o * in_dim..(o + 1) * in_dim];
        for i in 0..in_dim {
            grad_row[i] += g * input[i];
            grad_input[i] += g * row[i];
        }
    }
    grad_input
}

/// Convolution kernel side length.
pub const CONV_KERNEL: usize = 5;
/// Convolution stride.
pub const CONV_STRIDE: usize = 2;
/// Convolution zero padding on each side.
pub const CONV_PAD: usize = 2;

/// Shape of one convolution application.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConvShape {
    pub in_channels: usize,
    pub height: usize,
    pub width: usize,
    pub out_channels: usize,
}

impl ConvShape {
    pub fn out_height(&self) -> usize {
        self.height.div_ceil(CONV_STRIDE)
    }

    pub fn out_width(&self) -> usize {
        self.width.div_ceil(CONV_STRIDE)
    }

    pub fn kernel_len(&self) -> usize {
        self.out_channels * self.in_channels * CONV_KERNEL * CONV_KERNEL
    }

    pub fn input_len(&self) -> usize {
        self.in_channels * self.height * self.width
    }

    pub fn output_len(&self) -> usize {
        self.out_channels * self.out_height() * self.out_width()
    }
}

/// Strided cross-correlation with zero padding.
///
/// Kernels are laid out `[out_ch][in_ch][row][col]`. Per output cell the
/// accumulation order is input-channel, kernel-row, kernel-col; output cells
/// are produced in output-channel-major order.
pub fn conv2d_forward(
    kernels: &[f64],
    bias: &[f64],
    input: &[f64],
    shape: &ConvShape,
) -> Result<Vec<f64>, NnError> {
    if kernels.len() != shape.kernel_len()
        || bias.len() != shape.out_channels
        || input.len() != shape.input_len()
    {
        return Err(NnError::ShapeMismatch(format!(
            "conv2d kernels={} bias={} input={} vs shape {shape:?}",
            kernels.len(),
            bias.len(),
            input.len()
        )));
    }
    let (oh, ow) = (shape.out_height(), shape.out_width());
    let (h, w) = (shape.height, shape.width);
    let mut output = vec![0.0; shape.output_len()];
    for oc in 0..shape.out_channels {
        for or in 0..oh {
            for ocol in 0..ow {
                let mut acc = bias[oc];
                for ic in 0..shape.in_channels {
                    let in_plane = &input[ic * h * w..(ic + 1) * h * w];
                    let kbase = ((oc * shape.in_channels + ic) * CONV_KERNEL) * CONV_KERNEL;
                    for kr in 0..CONV_KERNEL {
                        let r = (or * CONV_STRIDE + kr) as isize - CONV_PAD as isize;
                        if r < 0 || r >= h as isize {
                            continue;
                        }
                        let in_row = &in_plane[r as usize * w..(r as usize + 1) * w];
                        for kc in 0..CONV_KERNEL {
                            let c = (ocol * CONV_STRIDE + kc) as isize - CONV_PAD as isize;
                            if c < 0 || c >= w as isize {
                                continue;
                            }
                            acc += kernels[kbase + kr * CONV_KERNEL + kc] * in_row[c as usize];
                        }
                    }
                }
                output[(oc * oh + or) * ow + ocol] = acc;
            }
        }
    }
    Ok(output)
}

/// Backward pass of [`conv2d_forward`]. Accumulates kernel and bias gradients
/// and returns the gradient with respect to the input.
pub fn conv2d_backward(
    kernels: &[f64],
    input: &[f64],
    upstream: &[f64],
    shape: &ConvShape,
    grad_kernels: &mut [f64],
    grad_bias: &mut [f64],
) -> Vec<f64> {
    let (oh, ow) = (shape.out_height(), shape.out_width());
    let (h, w) = (shape.height, shape.width);
    debug_assert_eq!(upstream.len(), shape.output_len());
    let mut grad_input = vec![0.0; shape.input_len()];
    for oc in 0..shape.out_channels {
        for or in 0..oh {
            for ocol in 0..ow {
                let g = upstream[(oc * oh + or) * ow + ocol];
                grad_bias[oc] += g;
                for ic in 0..shape.in_channels {
                    let plane = ic * h * w;
                    let kbase = ((oc * shape.in_channels + ic) * CONV_KERNEL) * CONV_KERNEL;
                    for kr in 0..CONV_KERNEL {
                        let r = (or * CONV_STRIDE + kr) as isize - CONV_PAD as isize;
                        if r < 0 || r >= h as isize {
                            continue;
                        }
                        let row = plane + r as usize * w;
                        for kc in 0..CONV_KERNEL {
                            let c = (ocol * CONV_STRIDE + kc) as isize - CONV_PAD as isize;
                            if c < 0 || c >= w as isize {
                                continue;
                            }
                            let k = kbase + kr * CONV_KERNEL + kc;
                            grad_kernels[k] += g * input[row + c as usize];
                            grad_input[row + c as usize] += g * kernels[k];
                        }
                    }
                }
            }
        }
    }
    grad_input
}

/// Elementwise `max(0, x)`.
pub fn relu(input: &[f64]) -> Vec<f64> {
    input.iter().map(|&x| x.max(0.0)).collect()
}

/// Backward pass of [`relu`], masking by the forward pre-activation.
pub fn relu_backward(pre_activation: &[f64], upstream: &[f64]) -> Vec<f64> {
    pre_activation
        .iter()
        .zip(upstream)
        .map(|(&x, &g)| if x > 0.0 { g } else { 0.0 })
        .collect()
}

/// Mean over each channel plane of a `[channels][cells]` tensor.
pub fn global_avg_pool(input: &[f64], channels: usize) -> Vec<f64> {
    let cells = input.len() / channels;
    (0..channels)
        .map(|c| input[c * cells..(c + 1) * cells].iter().sum::<f64>() / cells as f64)
        .collect()
}

/// Backward pass of [`global_avg_pool`].
pub fn global_avg_pool_backward(upstream: &[f64], channels: usize, cells: usize) -> Vec<f64> {
    let mut grad = vec![0.0; channels * cells];
    for c in 0..channels {
        let g = upstream[c] / cells as f64;
        for v in &mut grad[c * cells..(c + 1) * cells] {
            *v = g;
        }
    }
    grad
}

/// Overflow-safe logistic function.
pub fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// Overflow-safe `ln(sigmoid(x))`.
pub fn log_sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        -(-x).exp().ln_1p()
    } else {
        x - x.exp().ln_1p()
    }
}

/// Adam hyperparameters.
#[derive(Debug, Clone, Copy)]
pub struct AdamParams {
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
}

impl Default for AdamParams {
    fn default() -> Self {
        Self { learning_rate: 1e-3, beta1: 0.9, beta2: 0.999, epsilon: 1e-8 }
    }
}

/// Adam per-parameter moment estimates plus the step counter.
#[derive(Debug, Clone)]
pub struct AdamState {
    first_moment: Vec<f64>,
    second_moment: Vec<f64>,
    step_count: u64,
}

impl AdamState {
    pub fn new(param_count: usize) -> Self {
        Self {
            first_moment: vec![0.0; param_count],
            second_moment: vec![0.0; param_count],
            step_count: 0,
        }
    }

    pub fn step_count(&self) -> u64 {
        self.step_count
    }

    /// One bias-corrected Adam update, in place.
    pub fn step(
        &mut self,
        hyper: &AdamParams,
        params: &mut [f64],
        grads: &[f64],
    ) -> Result<(), NnError> {
        if params.len() != self.first_moment.len() || grads.len() != params.len() {
            return Err(NnError::ShapeMismatch(format!(
                "adam params={} grads={} state={}",
                params.len(),
                grads.len(),
                self.first_moment.len()
            )));
        }
        if grads.iter().any(|g| !g.is_finite()) {
            return Err(NnError::NumericError("non-finite gradient".into()));
        }
        self.step_count += 1;
        let t = self.step_count as i32;
        let bias1 = 1.0 - hyper.beta1.powi(t);
        let bias2 = 1.0 - hyper.beta2.powi(t);
        for i in 0..params.len() {
            let m = &mut self.first_moment[i];
            let v = &mut self.second_moment[i];
            *m = hyper.beta1 * *m + (1.0 - hyper.beta1) * grads[i];
            *v = hyper.beta2 * *v + (1.0 - hyper.beta2) * grads[i] * grads[i];
            let m_hat = *m / bias1;
            let v_hat = *v / bias2;
            params[i] -= hyper.learning_rate * m_hat / (v_hat.sqrt() + hyper.epsilon);
        }
        Ok(())
    }
}

/// Central finite differences `(f(p+h) - f(p-h)) / 2h` per coordinate.
/// The independent oracle for every analytic gradient in this crate.
pub fn finite_diff_grad<F: Fn(&[f64]) -> f64>(loss_fn: F, params: &[f64], h: f64) -> Vec<f64> {
    let mut work = params.to_vec();
    let mut grad = Vec::with_capacity(params.len());
    for i in 0..params.len() {
        let p = params[i];
        work[i] = p + h;
        let plus = loss_fn(&work);
        work[i] = p - h;
        let minus = loss_fn(&work);
        work[i] = p;
        grad.push((plus - minus) / (2.0 * h));
    }
    grad
}

/// Relative error with floor `max(|a|, |b|, 1e-8)` in the denominator.
pub fn relative_error(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(1e-8)
}
