//! The image-based tidiness score.
//!
//! A scene image is encoded to a 16-dim embedding by one of two shared-weight
//! encoders, then a small head maps the embedding to a scalar score: higher is
//! tidier. Two images are compared through the Bradley-Terry probability
//! `P[a tidier than b] = sigmoid(score(a) - score(b))`, which equals
//! `exp(r_a) / (exp(r_a) + exp(r_b))` without the overflow.
//!
//! Parameter layout is one flat `f64` vector, layer-major and row-major within
//! a layer:
//!
//! - `features`: dense 34->32 weights, bias; dense 32->16 weights, bias; head.
//! - `cnn`: conv 3->8 (5x5, stride 2) kernels, bias; conv 8->16 kernels, bias;
//!   global average pool (no parameters); head.
//! - head (both): dense 16->8 weights, bias; dense 8->1 weights, bias.

use rand::Rng;

use crate::nn::{
    conv2d_backward, conv2d_forward, dense_backward, dense_forward, global_avg_pool,
    global_avg_pool_backward, relu, relu_backward, sigmoid, ConvShape,
};
use crate::raster::{self, RasterImage};
use crate::rng::make_rng;

/// Length of the geometric feature vector.
pub const FEATURE_DIM: usize = 34;
/// Embedding width shared by both encoders.
pub const EMBED_DIM: usize = 16;

const FEAT_HIDDEN: usize = 32;
const HEAD_HIDDEN: usize = 8;
const CNN_MID: usize = 8;

const CONV1: ConvShape = ConvShape {
    in_channels: raster::CHANNELS,
    height: raster::HEIGHT,
    width: raster::WIDTH,
    out_channels: CNN_MID,
};
const CONV2: ConvShape = ConvShape {
    in_channels: CNN_MID,
    height: raster::HEIGHT / 2,
    width: raster::WIDTH / 2,
    out_channels: EMBED_DIM,
};

const HEAD_LEN: usize = HEAD_HIDDEN * EMBED_DIM + HEAD_HIDDEN + HEAD_HIDDEN + 1;

/// Which encoder precedes the shared head.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EncoderKind {
    Features,
    Cnn,
}

impl EncoderKind {
    pub fn name(self) -> &'static str {
        match self {
            EncoderKind::Features => "features",
            EncoderKind::Cnn => "cnn",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        match name {
            "features" => Some(EncoderKind::Features),
            "cnn" => Some(EncoderKind::Cnn),
            _ => None,
        }
    }

    pub fn tag(self) -> u8 {
        match self {
            EncoderKind::Features => 0,
            EncoderKind::Cnn => 1,
        }
    }

    pub fn from_tag(tag: u8) -> Option<Self> {
        match tag {
            0 => Some(EncoderKind::Features),
            1 => Some(EncoderKind::Cnn),
            _ => None,
        }
    }

    fn encoder_len(self) -> usize {
        match self {
            EncoderKind::Features => {
                FEAT_HIDDEN * FEATURE_DIM + FEAT_HIDDEN + EMBED_DIM * FEAT_HIDDEN + EMBED_DIM
            }
            EncoderKind::Cnn => CONV1.kernel_len() + CNN_MID + CONV2.kernel_len() + EMBED_DIM,
        }
    }

    /// Parameter ranges `[w1, b1, w2, b2]` of the encoder layers.
    fn encoder_ranges(self) -> [std::ops::Range<usize>; 4] {
        let (w1, h1, w2, out) = match self {
            EncoderKind::Features => {
                (FEAT_HIDDEN * FEATURE_DIM, FEAT_HIDDEN, EMBED_DIM * FEAT_HIDDEN, EMBED_DIM)
            }
            EncoderKind::Cnn => (CONV1.kernel_len(), CNN_MID, CONV2.kernel_len(), EMBED_DIM),
        };
        [0..w1, w1..w1 + h1, w1 + h1..w1 + h1 + w2, w1 + h1 + w2..w1 + h1 + w2 + out]
    }

    /// Parameter ranges `[w1, b1, w2, b2]` of the head layers.
    fn head_ranges(self) -> [std::ops::Range<usize>; 4] {
        let base = self.encoder_len();
        let w1 = HEAD_HIDDEN * EMBED_DIM;
        [
            base..base + w1,
            base + w1..base + w1 + HEAD_HIDDEN,
            base + w1 + HEAD_HIDDEN..base + w1 + 2 * HEAD_HIDDEN,
            base + w1 + 2 * HEAD_HIDDEN..base + w1 + 2 * HEAD_HIDDEN + 1,
        ]
    }
}

/// Geometric summary of a raster: 16-bin row-occupancy profile, 16-bin
/// column profile, overall occupancy mean, and the area-weighted entropy of
/// instance masses normalized by `ln 64`. All components lie in [0, 1].
pub fn geometric_features(image: &RasterImage) -> Vec<f64> {
    let occ = image.channel(0);
    let (h, w) = (raster::HEIGHT, raster::WIDTH);
    let mut features = Vec::with_capacity(FEATURE_DIM);

    let row_bin = h / 16;
    for bin in 0..16 {
        let mut sum = 0.0;
        for r in bin * row_bin..(bin + 1) * row_bin {
            for c in 0..w {
                sum += occ[r * w + c];
            }
        }
        features.push(sum / (row_bin * w) as f64);
    }
    let col_bin = w / 16;
    for bin in 0..16 {
        let mut sum = 0.0;
        for r in 0..h {
            for c in bin * col_bin..(bin + 1) * col_bin {
                sum += occ[r * w + c];
            }
        }
        features.push(sum / (col_bin * h) as f64);
    }
    features.push(occ.iter().sum::<f64>() / (h * w) as f64);

    // Instance-channel values are (k+1)/64, so bucket by k.
    let mut counts = [0usize; raster::MAX_INSTANCE_INDEX as usize + 1];
    let mut occupied = 0usize;
    for &v in image.channel(1) {
        if v > 0.0 {
            let k = (v * 64.0).round() as usize - 1;
            counts[k] += 1;
            occupied += 1;
        }
    }
    let mut entropy = 0.0;
    if occupied > 0 {
        for &count in counts.iter().filter(|&&c| c > 0) {
            let p = count as f64 / occupied as f64;
            entropy -= p * p.ln();
        }
    }
    features.push(entropy / 64f64.ln());

    debug_assert_eq!(features.len(), FEATURE_DIM);
    features
}

/// Cacheable per-scene input: the feature vector for the features encoder,
/// or the full raster for the CNN encoder.
#[derive(Debug, Clone)]
pub enum ScorerInput {
    Features(Vec<f64>),
    Image(Box<RasterImage>),
}

/// The tidiness score model: encoder choice plus one flat parameter vector
/// covering the encoder and the head.
#[derive(Debug, Clone, PartialEq)]
pub struct ScorerModel {
    pub encoder: EncoderKind,
    pub params: Vec<f64>,
}

impl ScorerModel {
    /// Total parameter count for an encoder kind (encoder plus head).
    pub fn param_count(kind: EncoderKind) -> usize {
        kind.encoder_len() + HEAD_LEN
    }

    pub fn zeros(kind: EncoderKind) -> Self {
        Self { encoder: kind, params: vec![0.0; Self::param_count(kind)] }
    }

    /// Seeded uniform init in `(-half_range, half_range)`.
    pub fn seeded_uniform(kind: EncoderKind, seed: u64, half_range: f64) -> Self {
        let mut rng = make_rng(seed);
        let params = (0..Self::param_count(kind))
            .map(|_| rng.random_range(-half_range..half_range))
            .collect();
        Self { encoder: kind, params }
    }

    /// Round every parameter to its nearest `f32`, the checkpoint precision.
    /// Models in this form round-trip through checkpoint files exactly.
    pub fn quantize_f32(&mut self) {
        for v in &mut self.params {
            *v = *v as f32 as f64;
        }
    }

    /// Precompute the per-scene input this model scores from.
    pub fn prepare(&self, image: &RasterImage) -> ScorerInput {
        match self.encoder {
            EncoderKind::Features => ScorerInput::Features(geometric_features(image)),
            EncoderKind::Cnn => ScorerInput::Image(Box::new(image.clone())),
        }
    }

    /// Encode an image into the shared 16-dim embedding.
    pub fn encode(&self, image: &RasterImage) -> Vec<f64> {
        match self.encoder {
            EncoderKind::Features => self.features_forward(&geometric_features(image)).embedding,
            EncoderKind::Cnn => self.cnn_forward(image.data()).embedding,
        }
    }

    /// The tidiness score of an image; unbounded, higher is tidier.
    pub fn score(&self, image: &RasterImage) -> f64 {
        match self.encoder {
            EncoderKind::Features => {
                self.score_prepared(&ScorerInput::Features(geometric_features(image)))
            }
            EncoderKind::Cnn => {
                let fwd = self.cnn_forward(image.data());
                self.head_forward(&fwd.embedding).score
            }
        }
    }

    pub fn score_prepared(&self, input: &ScorerInput) -> f64 {
        let embedding = match input {
            ScorerInput::Features(f) => self.features_forward(f).embedding,
            ScorerInput::Image(img) => self.cnn_forward(img.data()).embedding,
        };
        self.head_forward(&embedding).score
    }

    /// Bradley-Terry probability that `a` is tidier than `b`.
    pub fn pair_prob(&self, a: &RasterImage, b: &RasterImage) -> f64 {
        sigmoid(self.score(a) - self.score(b))
    }

    /// Accumulate `upstream * d(score)/d(params)` into `grad`. Calling this
    /// once per Siamese branch on the same buffer yields the shared-weight
    /// gradient sum.
    pub fn accumulate_score_grad(&self, input: &ScorerInput, upstream: f64, grad: &mut [f64]) {
        debug_assert_eq!(grad.len(), self.params.len());
        match input {
            ScorerInput::Features(f) => {
                let fwd = self.features_forward(f);
                let head = self.head_forward(&fwd.embedding);
                let d_embed = self.head_backward(&head, &fwd.embedding, upstream, grad);
                self.features_backward(&fwd, f, &d_embed, grad);
            }
            ScorerInput::Image(img) => {
                let fwd = self.cnn_forward(img.data());
                let head = self.head_forward(&fwd.embedding);
                let d_embed = self.head_backward(&head, &fwd.embedding, upstream, grad);
                self.cnn_backward(&fwd, img.data(), &d_embed, grad);
            }
        }
    }

    fn enc(&self, i: usize) -> &[f64] {
        &self.params[self.encoder.encoder_ranges()[i].clone()]
    }

    fn head(&self, i: usize) -> &[f64] {
        &self.params[self.encoder.head_ranges()[i].clone()]
    }

    fn features_forward(&self, features: &[f64]) -> EncForward {
        let z1 = dense_forward(self.enc(0), self.enc(1), features)
            .expect("fixed architecture shapes agree");
        let a1 = relu(&z1);
        let embedding =
            dense_forward(self.enc(2), self.enc(3), &a1).expect("fixed architecture shapes agree");
        EncForward { z1, a1, z2: Vec::new(), embedding }
    }

    fn cnn_forward(&self, image: &[f64]) -> EncForward {
        let z1 = conv2d_forward(self.enc(0), self.enc(1), image, &CONV1)
            .expect("fixed architecture shapes agree");
        let a1 = relu(&z1);
        let z2 = conv2d_forward(self.enc(2), self.enc(3), &a1, &CONV2)
            .expect("fixed architecture shapes agree");
        let a2 = relu(&z2);
        let embedding = global_avg_pool(&a2, EMBED_DIM);
        EncForward { z1, a1, z2, embedding }
    }

    fn head_forward(&self, embedding: &[f64]) -> HeadForward {
        let hz = dense_forward(self.head(0), self.head(1), embedding)
            .expect("fixed architecture shapes agree");
        let ha = relu(&hz);
        let out =
            dense_forward(self.head(2), self.head(3), &ha).expect("fixed architecture shapes agree");
        HeadForward { hz, ha, score: out[0] }
    }

    fn head_backward(
        &self,
        head: &HeadForward,
        embedding: &[f64],
        upstream: f64,
        grad: &mut [f64],
    ) -> Vec<f64> {
        let ranges = self.encoder.head_ranges();
        let mut gw2 = vec![0.0; HEAD_HIDDEN];
        let mut gb2 = vec![0.0; 1];
        let d_ha = dense_backward(self.head(2), &head.ha, &[upstream], &mut gw2, &mut gb2);
        let d_hz = relu_backward(&head.hz, &d_ha);
        let mut gw1 = vec![0.0; HEAD_HIDDEN * EMBED_DIM];
        let mut gb1 = vec![0.0; HEAD_HIDDEN];
        let d_embed = dense_backward(self.head(0), embedding, &d_hz, &mut gw1, &mut gb1);
        accumulate(grad, ranges[0].clone(), &gw1);
        accumulate(grad, ranges[1].clone(), &gb1);
        accumulate(grad, ranges[2].clone(), &gw2);
        accumulate(grad, ranges[3].clone(), &gb2);
        d_embed
    }

    fn features_backward(
        &self,
        fwd: &EncForward,
        features: &[f64],
        d_embed: &[f64],
        grad: &mut [f64],
    ) {
        let ranges = self.encoder.encoder_ranges();
        let mut gw2 = vec![0.0; EMBED_DIM * FEAT_HIDDEN];
        let mut gb2 = vec![0.0; EMBED_DIM];
        let d_a1 = dense_backward(self.enc(2), &fwd.a1, d_embed, &mut gw2, &mut gb2);
        let d_z1 = relu_backward(&fwd.z1, &d_a1);
        let mut gw1 = vec![0.0; FEAT_HIDDEN * FEATURE_DIM];
        let mut gb1 = vec![0.0; FEAT_HIDDEN];
        dense_backward(self.enc(0), features, &d_z1, &mut gw1, &mut gb1);
        accumulate(grad, ranges[0].clone(), &gw1);
        accumulate(grad, ranges[1].clone(), &gb1);
        accumulate(grad, ranges[2].clone(), &gw2);
        accumulate(grad, ranges[3].clone(), &gb2);
    }

    fn cnn_backward(&self, fwd: &EncForward, image: &[f64], d_embed: &[f64], grad: &mut [f64]) {
        let ranges = self.encoder.encoder_ranges();
        let cells2 = CONV2.out_height() * CONV2.out_width();
        let d_a2 = global_avg_pool_backward(d_embed, EMBED_DIM, cells2);
        let d_z2 = relu_backward(&fwd.z2, &d_a2);
        let mut gk2 = vec![0.0; CONV2.kernel_len()];
        let mut gb2 = vec![0.0; EMBED_DIM];
        let d_a1 = conv2d_backward(self.enc(2), &fwd.a1, &d_z2, &CONV2, &mut gk2, &mut gb2);
        let d_z1 = relu_backward(&fwd.z1, &d_a1);
        let mut gk1 = vec![0.0; CONV1.kernel_len()];
        let mut gb1 = vec![0.0; CNN_MID];
        conv2d_backward(self.enc(0), image, &d_z1, &CONV1, &mut gk1, &mut gb1);
        accumulate(grad, ranges[0].clone(), &gk1);
        accumulate(grad, ranges[1].clone(), &gb1);
        accumulate(grad, ranges[2].clone(), &gk2);
        accumulate(grad, ranges[3].clone(), &gb2);
    }
}

fn accumulate(grad: &mut [f64], range: std::ops::Range<usize>, src: &[f64]) {
    for (dst, s) in grad[range].iter_mut().zip(src) {
        *dst += s;
    }
}

struct EncForward {
    z1: Vec<f64>,
    a1: Vec<f64>,
    z2: Vec<f64>,
    embedding: Vec<f64>,
}

struct HeadForward {
    hz: Vec<f64>,
    ha: Vec<f64>,
    score: f64,
}
