//! Synthetic datasets with their exact generative prior, IDX ingestion and
//! PGM/PPM output.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::classifier::LabeledDataset;
use crate::denoiser::{ClassPrior, Component, DenoiserModel, GaussianMixture};
use crate::error::{Error, Result};
use crate::rng;
use crate::sample::{Sample, Shape};

const PRIOR_TOL: f64 = 1e-9;
const IDX_IMAGES: u32 = 0x0000_0803;
const IDX_LABELS: u32 = 0x0000_0801;

/// Names accepted by [`template`].
pub const TEMPLATES: &[&str] = &[
    "horizontal-stripes",
    "horizontal-stripes-shifted",
    "vertical-stripes",
    "vertical-stripes-shifted",
    "checkerboard",
    "checkerboard-shifted",
    "centered-blob",
    "ring",
    "diagonal",
    "anti-diagonal",
    "top-half",
    "bottom-half",
    "left-half",
    "right-half",
];

/// Pattern in `[0, 1]` before level mapping.
fn pattern(name: &str, row: usize, col: usize, h: usize, w: usize) -> Option<f64> {
    let on = |b: bool| if b { 1.0 } else { 0.0 };
    let (y, x) = (row as f64 + 0.5, col as f64 + 0.5);
    let (cy, cx) = (h as f64 / 2.0, w as f64 / 2.0);
    let r2 = (y - cy).powi(2) + (x - cx).powi(2);
    let s = h.min(w) as f64 / 4.0;
    Some(match name {
        "horizontal-stripes" => on(row.is_multiple_of(2)),
        "horizontal-stripes-shifted" => on(row % 2 == 1),
        "vertical-stripes" => on(col.is_multiple_of(2)),
        "vertical-stripes-shifted" => on(col % 2 == 1),
        "checkerboard" => on((row + col).is_multiple_of(2)),
        "checkerboard-shifted" => on((row + col) % 2 == 1),
        "centered-blob" => (-r2 / (2.0 * s * s)).exp(),
        "ring" => (-(r2.sqrt() - 1.5 * s).powi(2) / (0.5 * s * s)).exp(),
        "diagonal" => on(row * w <= col * h),
        "anti-diagonal" => on(row * w + col * h < h * w),
        "top-half" => on(2 * row < h),
        "bottom-half" => on(2 * row >= h),
        "left-half" => on(2 * col < w),
        "right-half" => on(2 * col >= w),
        _ => return None,
    })
}

/// Renders a named template, mapping the pattern onto `[low, high]`. All
/// channels share the pattern.
pub fn template(name: &str, shape: Shape, low: f64, high: f64) -> Result<Sample> {
    let (h, w, c) = (shape.height, shape.width, shape.channels);
    let mut data = Vec::with_capacity(shape.len());
    for row in 0..h {
        for col in 0..w {
            let p = pattern(name, row, col, h, w).ok_or_else(|| Error::UnknownTemplate(name.into()))?;
            data.extend(std::iter::repeat_n(low + (high - low) * p, c));
        }
    }
    Sample::new(shape, data)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClassSpec {
    pub name: String,
    /// One or more template names; each becomes an equally weighted
    /// mixture component.
    pub templates: Vec<String>,
    pub std: f64,
    pub prior: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SynthSpec {
    pub height: usize,
    pub width: usize,
    #[serde(default = "one")]
    pub channels: usize,
    pub samples_per_class: usize,
    #[serde(default = "default_low")]
    pub low: f64,
    #[serde(default = "default_high")]
    pub high: f64,
    pub classes: Vec<ClassSpec>,
}

fn one() -> usize {
    1
}
fn default_low() -> f64 {
    0.2
}
fn default_high() -> f64 {
    0.8
}

impl SynthSpec {
    /// Horizontal against vertical stripes, `n` samples per class.
    pub fn stripes(height: usize, width: usize, n: usize, std: f64) -> Self {
        let class = |name: &str, t: [&str; 1]| ClassSpec {
            name: name.into(),
            templates: t.iter().map(|s| s.to_string()).collect(),
            std,
            prior: 0.5,
        };
        Self {
            height,
            width,
            channels: 1,
            samples_per_class: n,
            low: default_low(),
            high: default_high(),
            classes: vec![
                class("horizontal", ["horizontal-stripes"]),
                class("vertical", ["vertical-stripes"]),
            ],
        }
    }

    pub fn shape(&self) -> Result<Shape> {
        Shape::new(self.height, self.width, self.channels)
    }

    pub fn validate(&self) -> Result<()> {
        self.shape()?;
        if self.classes.is_empty() {
            return Err(Error::InvalidDataset("no classes".into()));
        }
        if !(0.0..=1.0).contains(&self.low) || !(0.0..=1.0).contains(&self.high) {
            return Err(Error::InvalidDataset(format!(
                "levels must lie in [0, 1], got {} and {}",
                self.low, self.high
            )));
        }
        let mut total = 0.0;
        for c in &self.classes {
            if c.templates.is_empty() {
                return Err(Error::InvalidDataset(format!("class `{}` has no templates", c.name)));
            }
            if !(c.std > 0.0 && c.std.is_finite()) {
                return Err(Error::InvalidDataset(format!("class `{}` std must be positive", c.name)));
            }
            if !(c.prior > 0.0) {
                return Err(Error::InvalidDataset(format!("class `{}` prior must be positive", c.name)));
            }
            total += c.prior;
        }
        if (total - 1.0).abs() > PRIOR_TOL {
            return Err(Error::InvalidDataset(format!("priors sum to {total}, expected 1")));
        }
        Ok(())
    }

    /// The exact pre-clamp generative law as a class-conditional model.
    pub fn model(&self) -> Result<DenoiserModel> {
        self.validate()?;
        let shape = self.shape()?;
        let classes = self
            .classes
            .iter()
            .enumerate()
            .map(|(id, c)| {
                let weight = 1.0 / c.templates.len() as f64;
                let components = c
                    .templates
                    .iter()
                    .map(|t| {
                        Ok(Component {
                            weight,
                            mean: template(t, shape, self.low, self.high)?,
                            std: c.std,
                        })
                    })
                    .collect::<Result<Vec<_>>>()?;
                Ok(ClassPrior {
                    name: c.name.clone(),
                    prior: c.prior,
                    mixture: GaussianMixture::new(components, Some(id))?,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        DenoiserModel::new(classes)
    }
}

/// Draws `samples_per_class` images per class, interleaved by class, as
/// `clamp01(template + std * noise)` with the template picked uniformly
/// among the class's variants. Returns the dataset and the matching model.
///
/// Every image uses its own substream `(class, index)` of `rng_seed`.
pub fn synth_dataset(spec: &SynthSpec, rng_seed: u64) -> Result<(LabeledDataset, DenoiserModel)> {
    let model = spec.model()?;
    let shape = spec.shape()?;
    let k = spec.classes.len();
    let mut samples = Vec::with_capacity(k * spec.samples_per_class);
    let mut labels = Vec::with_capacity(samples.capacity());
    for j in 0..spec.samples_per_class {
        for (c, class) in model.classes().iter().enumerate() {
            let mut r = rng::substream(rng_seed, &[c as u64, j as u64]);
            let comps = class.mixture.components();
            let pick = rand::Rng::random_range(&mut r, 0..comps.len());
            let noise = rng::standard_normal(&mut r, shape);
            let comp = &comps[pick];
            let x = comp.mean.zip_with(&noise, |m, e| (m + comp.std * e).clamp(0.0, 1.0))?;
            samples.push(x);
            labels.push(c);
        }
    }
    Ok((LabeledDataset::new(samples, labels, k)?, model))
}

fn read_u32(bytes: &[u8], at: usize) -> Option<u32> {
    bytes.get(at..at + 4).map(|b| u32::from_be_bytes([b[0], b[1], b[2], b[3]]))
}

fn check_idx(path: &Path, bytes: &[u8], magic: u32, header: usize) -> Result<()> {
    let found = read_u32(bytes, 0).ok_or_else(|| Error::Truncated {
        path: path.into(),
        expected: header,
        found: bytes.len(),
    })?;
    if found != magic {
        return Err(Error::BadMagic { path: path.into(), expected: magic, found });
    }
    if bytes.len() < header {
        return Err(Error::Truncated { path: path.into(), expected: header, found: bytes.len() });
    }
    Ok(())
}

/// Parses IDX image and label payloads (big-endian, unsigned bytes).
pub fn parse_idx(images: &[u8], labels: &[u8], images_path: &Path, labels_path: &Path) -> Result<LabeledDataset> {
    check_idx(images_path, images, IDX_IMAGES, 16)?;
    check_idx(labels_path, labels, IDX_LABELS, 8)?;
    let count = read_u32(images, 4).unwrap() as usize;
    let rows = read_u32(images, 8).unwrap() as usize;
    let cols = read_u32(images, 12).unwrap() as usize;
    let label_count = read_u32(labels, 4).unwrap() as usize;
    let shape = Shape::new(rows, cols, 1)
        .map_err(|_| Error::InvalidDataset(format!("IDX image dimensions {rows}x{cols}")))?;

    let want = 16 + count * shape.len();
    if images.len() != want {
        return Err(Error::Truncated { path: images_path.into(), expected: want, found: images.len() });
    }
    if labels.len() != 8 + label_count {
        return Err(Error::Truncated {
            path: labels_path.into(),
            expected: 8 + label_count,
            found: labels.len(),
        });
    }
    if count != label_count {
        return Err(Error::CountMismatch { images: count, labels: label_count });
    }
    let samples = images[16..]
        .chunks_exact(shape.len())
        .map(|px| Sample::new(shape, px.iter().map(|&b| f64::from(b) / 255.0).collect()))
        .collect::<Result<Vec<_>>>()?;
    let labels: Vec<usize> = labels[8..].iter().map(|&b| usize::from(b)).collect();
    let classes = labels.iter().max().map_or(0, |m| m + 1);
    LabeledDataset::new(samples, labels, classes)
}

pub fn load_idx(images_path: &Path, labels_path: &Path) -> Result<LabeledDataset> {
    let images = fs::read(images_path)?;
    let labels = fs::read(labels_path)?;
    parse_idx(&images, &labels, images_path, labels_path)
}

/// Quantizes `v` in `[0, 1]` to a byte, rounding halves up.
pub fn quantize(v: f64) -> u8 {
    (255.0 * v + 0.5).floor().clamp(0.0, 255.0) as u8
}

/// Binary PGM (1 channel) or PPM (3 channels) encoding.
pub fn encode_pnm(x: &Sample) -> Result<Vec<u8>> {
    let shape = x.shape();
    let magic = match shape.channels {
        1 => "P5",
        3 => "P6",
        c => return Err(Error::UnsupportedChannels(c)),
    };
    if let Some(v) = x.as_slice().iter().find(|v| !(0.0..=1.0).contains(*v)) {
        return Err(Error::InvalidInput(format!("image entries must lie in [0, 1], found {v}")));
    }
    let mut out = format!("{magic}\n{} {}\n255\n", shape.width, shape.height).into_bytes();
    out.extend(x.as_slice().iter().map(|&v| quantize(v)));
    Ok(out)
}

pub fn write_image(x: &Sample, path: &Path) -> Result<()> {
    fs::write(path, encode_pnm(x)?)?;
    Ok(())
}

/// Decodes the exact header layout written by [`encode_pnm`].
pub fn decode_pnm(bytes: &[u8]) -> Result<Sample> {
    let bad = |m: &str| Error::Image(m.into());
    let mut fields = Vec::with_capacity(4);
    let mut pos = 0;
    while fields.len() < 4 {
        let end = bytes[pos..]
            .iter()
            .position(|b| b.is_ascii_whitespace())
            .ok_or_else(|| bad("header ends early"))?;
        let tok = std::str::from_utf8(&bytes[pos..pos + end]).map_err(|_| bad("header is not ASCII"))?;
        fields.push(tok.to_string());
        pos += end + 1;
    }
    let channels = match fields[0].as_str() {
        "P5" => 1,
        "P6" => 3,
        other => return Err(Error::Image(format!("unsupported magic `{other}`"))),
    };
    let num = |s: &str| s.parse::<usize>().map_err(|_| Error::Image(format!("bad header number `{s}`")));
    let (w, h, maxval) = (num(&fields[1])?, num(&fields[2])?, num(&fields[3])?);
    if maxval != 255 {
        return Err(Error::Image(format!("maxval {maxval} is not 255")));
    }
    let shape = Shape::new(h, w, channels).map_err(|_| bad("zero image dimension"))?;
    let body = &bytes[pos..];
    if body.len() != shape.len() {
        return Err(Error::Image(format!("expected {} pixel bytes, found {}", shape.len(), body.len())));
    }
    Sample::new(shape, body.iter().map(|&b| f64::from(b) / 255.0).collect())
}

pub fn read_pnm(path: &Path) -> Result<Sample> {
    decode_pnm(&fs::read(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classifier::{accuracy, train_classifier, ClassifierKind};

    fn p() -> &'static Path {
        Path::new("fixture")
    }

    /// Four 2x2 images and labels 0, 1, 2, 1, written out byte by byte.
    fn idx_fixture() -> (Vec<u8>, Vec<u8>) {
        let images = vec![
            0x00, 0x00, 0x08, 0x03, // magic
            0x00, 0x00, 0x00, 0x04, // count
            0x00, 0x00, 0x00, 0x02, // rows
            0x00, 0x00, 0x00, 0x02, // cols
            0x00, 0xFF, 0x80, 0x01, //
            0x10, 0x20, 0x30, 0x40, //
            0xFF, 0xFF, 0xFF, 0xFF, //
            0x00, 0x00, 0x00, 0x00,
        ];
        let labels = vec![0x00, 0x00, 0x08, 0x01, 0x00, 0x00, 0x00, 0x04, 0x00, 0x01, 0x02, 0x01];
        (images, labels)
    }

    #[test]
    fn idx_fixture_parses() {
        let (im, lb) = idx_fixture();
        let ds = parse_idx(&im, &lb, p(), p()).unwrap();
        assert_eq!(ds.len(), 4);
        assert_eq!(ds.classes(), 3);
        assert_eq!(ds.labels(), &[0, 1, 2, 1]);
        assert_eq!(ds.shape(), Some(Shape::new(2, 2, 1).unwrap()));
        assert_eq!(ds.samples()[0].as_slice(), &[0.0, 1.0, 128.0 / 255.0, 1.0 / 255.0]);
        assert_eq!(ds.samples()[3].as_slice(), &[0.0; 4]);
    }

    #[test]
    fn idx_mutations_get_specific_errors() {
        let (im, lb) = idx_fixture();

        let mut bad = im.clone();
        bad[3] = 0x01;
        assert!(matches!(
            parse_idx(&bad, &lb, p(), p()),
            Err(Error::BadMagic { expected: 0x803, found: 0x801, .. })
        ));
        let mut bad = lb.clone();
        bad[2] = 0x09;
        assert!(matches!(parse_idx(&im, &bad, p(), p()), Err(Error::BadMagic { .. })));

        assert!(matches!(
            parse_idx(&im[..im.len() - 1], &lb, p(), p()),
            Err(Error::Truncated { expected: 32, found: 31, .. })
        ));
        assert!(matches!(parse_idx(&im[..10], &lb, p(), p()), Err(Error::Truncated { .. })));
        assert!(matches!(parse_idx(&im, &lb[..11], p(), p()), Err(Error::Truncated { .. })));

        let mut fewer = lb.clone();
        fewer[7] = 3;
        fewer.pop();
        assert!(matches!(
            parse_idx(&im, &fewer, p(), p()),
            Err(Error::CountMismatch { images: 4, labels: 3 })
        ));
    }

    #[test]
    fn load_idx_reads_files() {
        let dir = std::env::temp_dir().join(format!("diffattack-idx-{}", std::process::id()));
        fs::create_dir_all(&dir).unwrap();
        let (im, lb) = idx_fixture();
        fs::write(dir.join("im"), im).unwrap();
        fs::write(dir.join("lb"), lb).unwrap();
        assert_eq!(load_idx(&dir.join("im"), &dir.join("lb")).unwrap().len(), 4);
        assert!(matches!(load_idx(&dir.join("nope"), &dir.join("lb")), Err(Error::Io(_))));
        fs::remove_dir_all(dir).unwrap();
    }

    #[test]
    fn pgm_is_bit_exact() {
        let x = Sample::zeros(Shape::new(2, 2, 1).unwrap());
        let mut want = b"P5\n2 2\n255\n".to_vec();
        want.extend([0, 0, 0, 0]);
        assert_eq!(encode_pnm(&x).unwrap(), want);

        let rgb = Sample::new(Shape::new(1, 2, 3).unwrap(), vec![1.0, 0.5, 0.0, 0.2, 0.4, 0.6]).unwrap();
        let mut want = b"P6\n2 1\n255\n".to_vec();
        want.extend([255, 128, 0, 51, 102, 153]);
        assert_eq!(encode_pnm(&rgb).unwrap(), want);
    }

    #[test]
    fn quantization_rounds_half_up() {
        assert_eq!(quantize(0.5), 128);
        assert_eq!(quantize(0.0), 0);
        assert_eq!(quantize(1.0), 255);
        assert_eq!(quantize(1.5 / 255.0), 2);
    }

    #[test]
    fn pnm_rejects_bad_input() {
        let two = Sample::zeros(Shape::new(2, 2, 2).unwrap());
        assert!(matches!(encode_pnm(&two), Err(Error::UnsupportedChannels(2))));
        let out = Sample::filled(Shape::new(1, 1, 1).unwrap(), 1.2);
        assert!(matches!(encode_pnm(&out), Err(Error::InvalidInput(_))));
        assert!(matches!(decode_pnm(b"P4\n1 1\n255\n\0"), Err(Error::Image(_))));
        assert!(matches!(decode_pnm(b"P5\n2 2\n255\n\0"), Err(Error::Image(_))));
    }

    #[test]
    fn pnm_round_trip_within_quantization() {
        let mut r = rng::seeded(4);
        for c in [1, 3] {
            let x = rng::standard_normal(&mut r, Shape::new(5, 7, c).unwrap()).map(|v| (0.5 + 0.2 * v).clamp(0.0, 1.0));
            let dir = std::env::temp_dir().join(format!("diffattack-pnm-{}-{c}", std::process::id()));
            write_image(&x, &dir).unwrap();
            let back = read_pnm(&dir).unwrap();
            fs::remove_file(&dir).unwrap();
            assert_eq!(back.shape(), x.shape());
            assert!(back.max_abs_diff(&x).unwrap() <= 1.0 / 510.0 + 1e-15);
        }
    }

    #[test]
    fn templates_are_known_and_in_range() {
        let shape = Shape::new(8, 8, 1).unwrap();
        for name in TEMPLATES {
            let t = template(name, shape, 0.2, 0.8).unwrap();
            assert!(t.as_slice().iter().all(|v| (0.2 - 1e-12..=0.8 + 1e-12).contains(v)), "{name}");
        }
        assert!(matches!(template("plaid", shape, 0.0, 1.0), Err(Error::UnknownTemplate(_))));
        let mut spec = SynthSpec::stripes(8, 8, 4, 0.1);
        spec.classes[1].templates.push("plaid".into());
        assert!(matches!(synth_dataset(&spec, 0), Err(Error::UnknownTemplate(_))));
    }

    #[test]
    fn spec_validation() {
        let good = SynthSpec::stripes(8, 8, 4, 0.1);
        assert!(good.validate().is_ok());
        let mut bad = good.clone();
        bad.classes[0].prior = 0.7;
        assert!(matches!(bad.validate(), Err(Error::InvalidDataset(_))));
        let mut bad = good.clone();
        bad.classes[0].std = 0.0;
        assert!(bad.validate().is_err());
        let mut bad = good;
        bad.classes.clear();
        assert!(bad.validate().is_err());
    }

    #[test]
    fn tiny_std_reproduces_templates() {
        let spec = SynthSpec::stripes(6, 6, 5, 1e-12);
        let (ds, model) = synth_dataset(&spec, 1).unwrap();
        for (x, y) in ds.iter() {
            let t = &model.classes()[y].mixture.components()[0].mean;
            assert!(x.max_abs_diff(t).unwrap() < 1e-10);
        }
    }

    #[test]
    fn synthesis_is_deterministic() {
        let spec = SynthSpec::stripes(8, 8, 10, 0.1);
        let (a, _) = synth_dataset(&spec, 9).unwrap();
        let (b, _) = synth_dataset(&spec, 9).unwrap();
        let (c, _) = synth_dataset(&spec, 10).unwrap();
        assert_eq!(a.samples(), b.samples());
        assert_ne!(a.samples(), c.samples());
        assert_eq!(&a.labels()[..4], &[0, 1, 0, 1]);
    }

    #[test]
    fn class_means_match_templates() {
        let n = 400;
        let std = 0.1;
        let mut spec = SynthSpec::stripes(8, 8, n, std);
        spec.classes[0].templates = vec!["centered-blob".into()];
        spec.classes[1].templates = vec!["checkerboard".into()];
        let (ds, model) = synth_dataset(&spec, 21).unwrap();
        let d = 64;
        for (c, class) in model.classes().iter().enumerate() {
            let template = &class.mixture.components()[0].mean;
            let mut mean = vec![0.0; d];
            for (x, _) in ds.iter().filter(|(_, y)| *y == c) {
                mean.iter_mut().zip(x.as_slice()).for_each(|(m, v)| *m += v / n as f64);
            }
            let se = std / (n as f64).sqrt();
            let diffs: Vec<f64> = mean.iter().zip(template.as_slice()).map(|(m, t)| m - t).collect();
            // Averaged over pixels the deviation has standard error se / sqrt(d).
            let avg = diffs.iter().sum::<f64>() / d as f64;
            assert!(avg.abs() < 3.0 * se / (d as f64).sqrt(), "class {c}: {avg}");
            let outside = diffs.iter().filter(|e| e.abs() > 3.0 * se).count();
            assert!(outside <= 2, "class {c}: {outside} pixels beyond 3 se");
        }
    }

    #[test]
    fn stripes_are_linearly_separable_after_training() {
        let spec = SynthSpec::stripes(8, 8, 200, 0.1);
        let (ds, _) = synth_dataset(&spec, 2).unwrap();
        let clf = train_classifier(&ds, ClassifierKind::SoftmaxLinear, 200, 0.5, 3).unwrap();
        assert!(accuracy(&clf, &ds).unwrap() >= 0.95);
    }
}
