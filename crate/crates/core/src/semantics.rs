//! Triplets, attention heatmaps, personalised priorities and match scores.
//!
//! Heatmaps come either from files (a text grid per map, referenced from a
//! JSON manifest) or from [`synth_dataset`], which stands in for the triplet
//! detector and saliency predictor with Gaussian blobs.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use rand::seq::IndexedRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::rng::substream;
use crate::{Error, Result};

/// Pixel rectangle `[x0, x1) × [y0, y1)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct BBox {
    pub x0: usize,
    pub y0: usize,
    pub x1: usize,
    pub y1: usize,
}

impl BBox {
    pub fn new(x0: usize, y0: usize, x1: usize, y1: usize) -> Self {
        BBox { x0, y0, x1, y1 }
    }

    fn check(&self, width: usize, height: usize) -> Result<()> {
        if self.x0 < self.x1 && self.x1 <= width && self.y0 < self.y1 && self.y1 <= height {
            Ok(())
        } else {
            Err(Error::Shape(format!("box {self:?} does not fit a {width}×{height} grid")))
        }
    }
}

/// Row-major grid of non-negative attention values.
#[derive(Debug, Clone, PartialEq)]
pub struct Heatmap {
    width: usize,
    height: usize,
    values: Vec<f64>,
}

impl Heatmap {
    pub fn new(width: usize, height: usize, values: Vec<f64>) -> Result<Self> {
        if width == 0 || height == 0 || values.len() != width * height {
            return Err(Error::Shape(format!(
                "{} values cannot form a {width}×{height} grid",
                values.len()
            )));
        }
        if let Some(v) = values.iter().find(|v| !(v.is_finite() && **v >= 0.0)) {
            return Err(Error::Shape(format!("heatmap values must be finite and non-negative, found {v}")));
        }
        Ok(Heatmap { width, height, values })
    }

    pub fn filled(width: usize, height: usize, value: f64) -> Result<Self> {
        Self::new(width, height, vec![value; width * height])
    }

    pub fn from_fn(width: usize, height: usize, f: impl Fn(usize, usize) -> f64) -> Result<Self> {
        let mut values = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                values.push(f(x, y));
            }
        }
        Self::new(width, height, values)
    }

    pub fn width(&self) -> usize {
        self.width
    }
    pub fn height(&self) -> usize {
        self.height
    }
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Value at column `x`, row `y`.
    pub fn get(&self, x: usize, y: usize) -> f64 {
        self.values[y * self.width + x]
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(0.0, f64::max)
    }

    /// Multiplies every value by `c ≥ 0`.
    pub fn scaled(&self, c: f64) -> Result<Self> {
        Self::new(self.width, self.height, self.values.iter().map(|v| v * c).collect())
    }

    fn same_shape(&self, other: &Heatmap) -> Result<()> {
        if self.width == other.width && self.height == other.height {
            Ok(())
        } else {
            Err(Error::Shape(format!(
                "heatmap sizes differ: {}×{} vs {}×{}",
                self.width, self.height, other.width, other.height
            )))
        }
    }

    /// Parses the text grid format: a header `H W` then `H` rows of `W` numbers.
    pub fn parse(text: &str, file: &Path) -> Result<Self> {
        let err = |line: usize, field: &str, msg: String| Error::Parse {
            file: file.to_path_buf(),
            line,
            field: field.into(),
            msg,
        };
        let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
        let (hl, header) = lines.next().ok_or_else(|| err(1, "header", "empty file".into()))?;
        let dims: Vec<&str> = header.split_whitespace().collect();
        let parse_dim = |s: &str, name: &str| {
            s.parse::<usize>()
                .ok()
                .filter(|v| *v > 0)
                .ok_or_else(|| err(hl + 1, name, format!("expected a positive integer, found `{s}`")))
        };
        if dims.len() != 2 {
            return Err(err(hl + 1, "header", format!("expected `H W`, found `{header}`")));
        }
        let height = parse_dim(dims[0], "H")?;
        let width = parse_dim(dims[1], "W")?;
        let mut values = Vec::with_capacity(width * height);
        for row in 0..height {
            let (ln, line) = lines
                .next()
                .ok_or_else(|| err(hl + 2 + row, "row", format!("expected {height} rows, found {row}")))?;
            let before = values.len();
            for (col, tok) in line.split_whitespace().enumerate() {
                let v: f64 = tok
                    .parse()
                    .map_err(|_| err(ln + 1, &format!("column {}", col + 1), format!("not a number: `{tok}`")))?;
                if !(v.is_finite() && v >= 0.0) {
                    return Err(err(ln + 1, &format!("column {}", col + 1), format!("value {v} is negative or not finite")));
                }
                values.push(v);
            }
            if values.len() - before != width {
                return Err(err(ln + 1, "row", format!("expected {width} values, found {}", values.len() - before)));
            }
        }
        if let Some((ln, _)) = lines.next() {
            return Err(err(ln + 1, "row", format!("more than {height} rows")));
        }
        Heatmap::new(width, height, values)
    }

    /// Renders in the text grid format.
    pub fn to_text(&self) -> String {
        let mut s = format!("{} {}\n", self.height, self.width);
        for row in self.values.chunks(self.width) {
            let cells: Vec<String> = row.iter().map(|v| format!("{v}")).collect();
            s.push_str(&cells.join(" "));
            s.push('\n');
        }
        s
    }
}

/// A `(subject, relation, object)` text pattern, as used for queries.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct TripletPattern {
    pub subject: String,
    pub relation: String,
    pub object: String,
}

impl TripletPattern {
    pub fn new(subject: &str, relation: &str, object: &str) -> Self {
        TripletPattern {
            subject: subject.into(),
            relation: relation.into(),
            object: object.into(),
        }
    }

    /// Splits `"subject relation object"` on whitespace; multi-word parts are
    /// not supported by this shorthand.
    pub fn parse(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split_whitespace().collect();
        match parts.as_slice() {
            [a, b, c] => Ok(Self::new(a, b, c)),
            _ => Err(Error::Config(format!("query `{s}` is not of the form `subject relation object`"))),
        }
    }

    fn validate(&self) -> Result<()> {
        if [&self.subject, &self.relation, &self.object].iter().any(|s| s.trim().is_empty()) {
            Err(Error::Shape(format!("triplet fields must be non-empty: {self}")))
        } else {
            Ok(())
        }
    }
}

impl fmt::Display for TripletPattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {} {}", self.subject, self.relation, self.object)
    }
}

/// A detected triplet with its boxes and objective attention maps.
#[derive(Debug, Clone, PartialEq)]
pub struct Triplet {
    pub pattern: TripletPattern,
    pub box_sub: BBox,
    pub box_obj: BBox,
    pub h_sub: Heatmap,
    pub h_obj: Heatmap,
}

impl Triplet {
    fn validate(&self) -> Result<()> {
        self.pattern.validate()?;
        self.h_sub.same_shape(&self.h_obj)?;
        self.box_sub.check(self.h_sub.width, self.h_sub.height)?;
        self.box_obj.check(self.h_obj.width, self.h_obj.height)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ImageRecord {
    pub id: String,
    pub size_bytes: u64,
    pub width: usize,
    pub height: usize,
    pub triplets: Vec<Triplet>,
}

impl ImageRecord {
    pub fn validate(&self) -> Result<()> {
        if self.triplets.is_empty() {
            return Err(Error::Shape(format!("image {} has no triplets", self.id)));
        }
        for t in &self.triplets {
            t.validate()?;
            if t.h_sub.width != self.width || t.h_sub.height != self.height {
                return Err(Error::Shape(format!("heatmap size differs from image {}", self.id)));
            }
        }
        Ok(())
    }
}

/// A user's query and per-image saliency maps.
#[derive(Debug, Clone, PartialEq)]
pub struct UserProfile {
    pub user_id: u32,
    pub query: TripletPattern,
    pub saliency: BTreeMap<String, Heatmap>,
}

/// Images and users of one experiment.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub images: Vec<ImageRecord>,
    pub users: Vec<UserProfile>,
}

impl Dataset {
    pub fn validate(&self) -> Result<()> {
        let mut seen = std::collections::HashSet::new();
        for img in &self.images {
            img.validate()?;
            if !seen.insert(img.id.as_str()) {
                return Err(Error::Shape(format!("duplicate image id {}", img.id)));
            }
        }
        for u in &self.users {
            u.query.validate()?;
            for img in &self.images {
                let s = u
                    .saliency
                    .get(&img.id)
                    .ok_or_else(|| Error::Shape(format!("user {} has no saliency for image {}", u.user_id, img.id)))?;
                if s.width != img.width || s.height != img.height {
                    return Err(Error::Shape(format!(
                        "saliency of user {} for image {} has the wrong size",
                        u.user_id, img.id
                    )));
                }
            }
        }
        Ok(())
    }
}

/// Expected match-score summary of one user.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ScoreReport {
    /// Number of images the user receives triplets for.
    pub n_rec: usize,
    /// Expected number of images matched after transmission.
    pub n_in: f64,
    /// Number of images matched without drops.
    pub n_truth: usize,
    pub s: f64,
    pub s_tilde: f64,
}

/// Weighting of objective attention against subjective saliency.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FusionConvention {
    /// `α · norm(H) + (1 − α) · norm(S)`: `α` weighs the objective attention.
    #[default]
    Text,
    /// `α · norm(S) + (1 − α) · norm(H)`.
    Swapped,
}

/// Divides by the global maximum; an all-zero map is returned unchanged.
pub fn normalize_heatmap(h: &Heatmap) -> Heatmap {
    let m = h.max();
    if m == 0.0 {
        return h.clone();
    }
    Heatmap {
        width: h.width,
        height: h.height,
        values: h.values.iter().map(|v| v / m).collect(),
    }
}

/// Fuses objective attention `h` with subjective saliency `s`.
pub fn fuse_attention(h: &Heatmap, s: &Heatmap, alpha: f64, convention: FusionConvention) -> Result<Heatmap> {
    h.same_shape(s)?;
    if !(0.0..=1.0).contains(&alpha) {
        return Err(Error::domain("fuse_attention", format!("α must lie in [0, 1], got {alpha}")));
    }
    let (nh, ns) = (normalize_heatmap(h), normalize_heatmap(s));
    let (wh, ws) = match convention {
        FusionConvention::Text => (alpha, 1.0 - alpha),
        FusionConvention::Swapped => (1.0 - alpha, alpha),
    };
    let values = if wh == 1.0 {
        nh.values
    } else if ws == 1.0 {
        ns.values
    } else {
        nh.values.iter().zip(&ns.values).map(|(a, b)| wh * a + ws * b).collect()
    };
    Ok(Heatmap {
        width: h.width,
        height: h.height,
        values,
    })
}

/// The sub-grid covered by `b`.
pub fn crop(f: &Heatmap, b: &BBox) -> Result<Heatmap> {
    b.check(f.width, f.height)?;
    let mut values = Vec::with_capacity((b.x1 - b.x0) * (b.y1 - b.y0));
    for y in b.y0..b.y1 {
        values.extend_from_slice(&f.values[y * f.width + b.x0..y * f.width + b.x1]);
    }
    Heatmap::new(b.x1 - b.x0, b.y1 - b.y0, values)
}

fn box_max(f: &Heatmap, b: &BBox) -> Result<f64> {
    b.check(f.width, f.height)?;
    let mut m = 0.0f64;
    for y in b.y0..b.y1 {
        for v in &f.values[y * f.width + b.x0..y * f.width + b.x1] {
            m = m.max(*v);
        }
    }
    Ok(m)
}

/// Personalised priority: the product of the fused-attention maxima inside
/// the subject and object boxes.
pub fn triplet_priority(t: &Triplet, s_user: &Heatmap, alpha: f64, convention: FusionConvention) -> Result<f64> {
    let fs = fuse_attention(&t.h_sub, s_user, alpha, convention)?;
    let fo = fuse_attention(&t.h_obj, s_user, alpha, convention)?;
    Ok(box_max(&fs, &t.box_sub)? * box_max(&fo, &t.box_obj)?)
}

/// Priority from objective attention alone.
pub fn objective_priority(t: &Triplet) -> Result<f64> {
    Ok(box_max(&normalize_heatmap(&t.h_sub), &t.box_sub)? * box_max(&normalize_heatmap(&t.h_obj), &t.box_obj)?)
}

/// Exact-match triplet search: 1 if the query appears among the received patterns.
pub fn match_score_am<'a, I>(received: I, query: &TripletPattern) -> u8
where
    I: IntoIterator<Item = &'a TripletPattern>,
{
    received.into_iter().any(|p| p == query) as u8
}

/// Indices of the triplets of `image` that match `query` exactly.
pub fn matching_triplets(image: &ImageRecord, query: &TripletPattern) -> Vec<usize> {
    image
        .triplets
        .iter()
        .enumerate()
        .filter(|(_, t)| &t.pattern == query)
        .map(|(i, _)| i)
        .collect()
}

/// Expected match score under independent triplet drops.
///
/// `delivery[i][t]` is the probability that triplet `t` of image `i`
/// arrives. An image counts as matched if any of its matching triplets
/// arrives.
pub fn expected_score(user: &UserProfile, images: &[ImageRecord], delivery: &[Vec<f64>]) -> Result<ScoreReport> {
    if delivery.len() != images.len() {
        return Err(Error::Shape(format!(
            "delivery table has {} images, dataset has {}",
            delivery.len(),
            images.len()
        )));
    }
    let mut n_truth = 0;
    let mut n_in = 0.0;
    for (img, d) in images.iter().zip(delivery) {
        if d.len() != img.triplets.len() {
            return Err(Error::Shape(format!("delivery row for image {} has the wrong length", img.id)));
        }
        let m = matching_triplets(img, &user.query);
        if m.is_empty() {
            continue;
        }
        n_truth += 1;
        let miss: f64 = m.iter().map(|&t| 1.0 - d[t].clamp(0.0, 1.0)).product();
        n_in += 1.0 - miss;
    }
    let n_rec = images.len();
    let denom = n_rec.max(1) as f64;
    Ok(ScoreReport {
        n_rec,
        n_in,
        n_truth,
        s: n_in / denom,
        s_tilde: n_truth as f64 / denom,
    })
}

// ---------------------------------------------------------------------------
// Manifest I/O

#[derive(Serialize, Deserialize)]
struct ManifestFile {
    images: Vec<ManifestImage>,
    users: Vec<ManifestUser>,
}

#[derive(Serialize, Deserialize)]
struct ManifestImage {
    id: String,
    size_bytes: u64,
    width: usize,
    height: usize,
    triplets: Vec<ManifestTriplet>,
}

#[derive(Serialize, Deserialize)]
struct ManifestTriplet {
    subject: String,
    relation: String,
    object: String,
    box_sub: [usize; 4],
    box_obj: [usize; 4],
    h_sub: PathBuf,
    h_obj: PathBuf,
}

#[derive(Serialize, Deserialize)]
struct ManifestUser {
    id: u32,
    query: TripletPattern,
    saliency: BTreeMap<String, PathBuf>,
}

fn line_of(text: &str, needle: &str) -> usize {
    text.find(needle).map(|p| text[..p].lines().count().max(1)).unwrap_or(0)
}

/// Loads a dataset from a JSON manifest; heatmap paths are relative to the
/// manifest's directory.
pub fn load_dataset(manifest: &Path) -> Result<Dataset> {
    let text = fs::read_to_string(manifest).map_err(|e| Error::io(manifest, e))?;
    let parsed: ManifestFile = serde_json::from_str(&text).map_err(|e| Error::Parse {
        file: manifest.to_path_buf(),
        line: e.line(),
        field: "manifest".into(),
        msg: e.to_string(),
    })?;
    let base = manifest.parent().unwrap_or(Path::new("."));
    let mut cache: HashMap<PathBuf, Heatmap> = HashMap::new();
    let mut load = |rel: &Path| -> Result<Heatmap> {
        if let Some(h) = cache.get(rel) {
            return Ok(h.clone());
        }
        let path = base.join(rel);
        let t = fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
        let h = Heatmap::parse(&t, &path)?;
        cache.insert(rel.to_path_buf(), h.clone());
        Ok(h)
    };
    let invalid = |needle: &str, field: &str, e: Error| Error::Parse {
        file: manifest.to_path_buf(),
        line: line_of(&text, needle),
        field: field.into(),
        msg: e.to_string(),
    };

    let mut images = Vec::with_capacity(parsed.images.len());
    for mi in parsed.images {
        let needle = format!("\"{}\"", mi.id);
        let mut triplets = Vec::with_capacity(mi.triplets.len());
        for (k, mt) in mi.triplets.into_iter().enumerate() {
            let b = |a: [usize; 4]| BBox::new(a[0], a[1], a[2], a[3]);
            let t = Triplet {
                pattern: TripletPattern {
                    subject: mt.subject,
                    relation: mt.relation,
                    object: mt.object,
                },
                box_sub: b(mt.box_sub),
                box_obj: b(mt.box_obj),
                h_sub: load(&mt.h_sub)?,
                h_obj: load(&mt.h_obj)?,
            };
            t.validate().map_err(|e| invalid(&needle, &format!("images[{}].triplets[{k}]", mi.id), e))?;
            triplets.push(t);
        }
        let img = ImageRecord {
            id: mi.id,
            size_bytes: mi.size_bytes,
            width: mi.width,
            height: mi.height,
            triplets,
        };
        img.validate().map_err(|e| invalid(&needle, &format!("images[{}]", img.id), e))?;
        images.push(img);
    }
    let mut users = Vec::with_capacity(parsed.users.len());
    for mu in parsed.users {
        let mut saliency = BTreeMap::new();
        for (id, p) in mu.saliency {
            saliency.insert(id, load(&p)?);
        }
        users.push(UserProfile {
            user_id: mu.id,
            query: mu.query,
            saliency,
        });
    }
    let ds = Dataset { images, users };
    ds.validate().map_err(|e| invalid("\"users\"", "users", e))?;
    Ok(ds)
}

/// Writes `manifest.json` and a `heatmaps/` directory under `dir`.
///
/// Identical maps are written once and shared by reference.
pub fn save_dataset(ds: &Dataset, dir: &Path) -> Result<PathBuf> {
    let hdir = dir.join("heatmaps");
    fs::create_dir_all(&hdir).map_err(|e| Error::io(&hdir, e))?;
    let mut written: HashMap<Vec<u64>, PathBuf> = HashMap::new();
    let mut write = |h: &Heatmap, name: String| -> Result<PathBuf> {
        let mut key: Vec<u64> = h.values.iter().map(|v| v.to_bits()).collect();
        key.push(h.width as u64);
        if let Some(p) = written.get(&key) {
            return Ok(p.clone());
        }
        let rel = PathBuf::from("heatmaps").join(format!("{name}.txt"));
        let path = dir.join(&rel);
        fs::write(&path, h.to_text()).map_err(|e| Error::io(&path, e))?;
        written.insert(key, rel.clone());
        Ok(rel)
    };
    let b = |x: &BBox| [x.x0, x.y0, x.x1, x.y1];
    let mut images = Vec::new();
    for img in &ds.images {
        let mut triplets = Vec::new();
        for (k, t) in img.triplets.iter().enumerate() {
            triplets.push(ManifestTriplet {
                subject: t.pattern.subject.clone(),
                relation: t.pattern.relation.clone(),
                object: t.pattern.object.clone(),
                box_sub: b(&t.box_sub),
                box_obj: b(&t.box_obj),
                h_sub: write(&t.h_sub, format!("{}_t{k}_sub", img.id))?,
                h_obj: write(&t.h_obj, format!("{}_t{k}_obj", img.id))?,
            });
        }
        images.push(ManifestImage {
            id: img.id.clone(),
            size_bytes: img.size_bytes,
            width: img.width,
            height: img.height,
            triplets,
        });
    }
    let mut users = Vec::new();
    for u in &ds.users {
        let mut saliency = BTreeMap::new();
        for (id, h) in &u.saliency {
            saliency.insert(id.clone(), write(h, format!("user{}_{id}", u.user_id))?);
        }
        users.push(ManifestUser {
            id: u.user_id,
            query: u.query.clone(),
            saliency,
        });
    }
    let path = dir.join("manifest.json");
    let text = serde_json::to_string_pretty(&ManifestFile { images, users })
        .map_err(|e| Error::Config(format!("cannot serialise manifest: {e}")))?;
    fs::write(&path, text).map_err(|e| Error::io(&path, e))?;
    Ok(path)
}

// ---------------------------------------------------------------------------
// Synthetic datasets

/// How synthetic attention and saliency are laid out.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SynthLayout {
    /// Street-like scenes: Gaussian blobs on entities, users' saliency
    /// concentrated on the entities of their own query.
    #[default]
    Scene,
    /// Every query triplet has its subject where only the user looks and its
    /// object where only the detector looks, so its fused priority is
    /// maximal strictly inside `0 < α < 1`.
    Disagreeing,
}

/// Parameters of the synthetic generator.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SynthSpec {
    pub n_images: usize,
    pub triplets_per_image: usize,
    pub width: usize,
    pub height: usize,
    pub size_bytes: u64,
    /// Per-user probability that an image contains the user's query.
    pub query_rate: Vec<f64>,
    pub layout: SynthLayout,
    pub subjects: Vec<String>,
    pub relations: Vec<String>,
    pub objects: Vec<String>,
}

impl Default for SynthSpec {
    fn default() -> Self {
        let v = |xs: &[&str]| xs.iter().map(|s| s.to_string()).collect();
        SynthSpec {
            n_images: 59,
            triplets_per_image: 10,
            width: 32,
            height: 24,
            size_bytes: 1_270_000,
            query_rate: vec![0.55, 0.2, 0.45],
            layout: SynthLayout::Scene,
            subjects: v(&["man", "woman", "car", "bus", "sign", "tree", "person", "building", "window", "pole"]),
            relations: v(&["on", "has", "wearing", "near", "in", "behind", "of", "holding"]),
            objects: v(&["street", "hair", "shirt", "building", "sidewalk", "jacket", "car", "sign", "road", "bag"]),
        }
    }
}

/// The three queries of the reference user study.
pub fn reference_queries() -> Vec<TripletPattern> {
    vec![
        TripletPattern::new("woman", "has", "hair"),
        TripletPattern::new("sign", "on", "building"),
        TripletPattern::new("woman", "wearing", "shirt"),
    ]
}

fn blob(b: &BBox, amp: f64) -> impl Fn(usize, usize) -> f64 {
    let cx = 0.5 * (b.x0 + b.x1) as f64 - 0.5;
    let cy = 0.5 * (b.y0 + b.y1) as f64 - 0.5;
    let sx = ((b.x1 - b.x0) as f64 / 2.0).max(0.8);
    let sy = ((b.y1 - b.y0) as f64 / 2.0).max(0.8);
    move |x, y| {
        let dx = (x as f64 - cx) / sx;
        let dy = (y as f64 - cy) / sy;
        amp * (-0.5 * (dx * dx + dy * dy)).exp()
    }
}

fn random_box<R: Rng>(rng: &mut R, w: usize, h: usize) -> BBox {
    let bw = rng.random_range(3..=(w / 3).max(3));
    let bh = rng.random_range(3..=(h / 3).max(3));
    let x0 = rng.random_range(0..=w - bw);
    let y0 = rng.random_range(0..=h - bh);
    BBox::new(x0, y0, x0 + bw, y0 + bh)
}

fn sum_fields(w: usize, h: usize, fields: &[Box<dyn Fn(usize, usize) -> f64>], floor: f64) -> Result<Heatmap> {
    Heatmap::from_fn(w, h, |x, y| floor + fields.iter().map(|f| f(x, y)).sum::<f64>())
}

/// Generates a dataset for the given user queries, deterministically in `seed`.
pub fn synth_dataset(spec: &SynthSpec, queries: &[TripletPattern], seed: u64) -> Result<Dataset> {
    if spec.n_images == 0 || spec.triplets_per_image == 0 || spec.width < 9 || spec.height < 9 {
        return Err(Error::Config("synthetic spec needs images, triplets and a grid of at least 9×9".into()));
    }
    if spec.subjects.is_empty() || spec.relations.is_empty() || spec.objects.is_empty() {
        return Err(Error::Config("synthetic vocabulary must not be empty".into()));
    }
    if queries.len() > spec.triplets_per_image {
        return Err(Error::Config("more queries than triplets per image".into()));
    }
    match spec.layout {
        SynthLayout::Scene => synth_scene(spec, queries, seed),
        SynthLayout::Disagreeing => synth_disagreeing(spec, queries, seed),
    }
}

struct Placed {
    pattern: TripletPattern,
    box_sub: BBox,
    box_obj: BBox,
    /// Index of the user whose query this is, if any.
    owner: Option<usize>,
}

fn draw_patterns<R: Rng>(
    rng: &mut R,
    spec: &SynthSpec,
    queries: &[TripletPattern],
    image: usize,
    seed: u64,
) -> Vec<Placed> {
    let (w, h) = (spec.width, spec.height);
    let mut placed = Vec::with_capacity(spec.triplets_per_image);
    for (k, q) in queries.iter().enumerate() {
        let rate = spec.query_rate.get(k).copied().unwrap_or(0.3);
        let mut qrng = substream(seed, &[2, image as u64, k as u64]);
        if qrng.random::<f64>() < rate {
            placed.push(Placed {
                pattern: q.clone(),
                box_sub: random_box(rng, w, h),
                box_obj: random_box(rng, w, h),
                owner: Some(k),
            });
        }
    }
    while placed.len() < spec.triplets_per_image {
        let p = TripletPattern {
            subject: spec.subjects.choose(rng).cloned().unwrap_or_default(),
            relation: spec.relations.choose(rng).cloned().unwrap_or_default(),
            object: spec.objects.choose(rng).cloned().unwrap_or_default(),
        };
        if queries.contains(&p) {
            continue;
        }
        placed.push(Placed {
            pattern: p,
            box_sub: random_box(rng, w, h),
            box_obj: random_box(rng, w, h),
            owner: None,
        });
    }
    placed
}

fn synth_scene(spec: &SynthSpec, queries: &[TripletPattern], seed: u64) -> Result<Dataset> {
    let (w, h) = (spec.width, spec.height);
    let mut images = Vec::with_capacity(spec.n_images);
    let mut saliency: Vec<BTreeMap<String, Heatmap>> = vec![BTreeMap::new(); queries.len()];
    for i in 0..spec.n_images {
        let mut rng = substream(seed, &[1, i as u64]);
        let id = format!("img{i:03}");
        let placed = draw_patterns(&mut rng, spec, queries, i, seed);

        // Objective attention: one field per image, entity blobs with
        // detector-assigned amplitudes.
        let mut fields: Vec<Box<dyn Fn(usize, usize) -> f64>> = Vec::new();
        for p in &placed {
            fields.push(Box::new(blob(&p.box_sub, rng.random_range(0.1..1.0))));
            fields.push(Box::new(blob(&p.box_obj, rng.random_range(0.1..1.0))));
        }
        let attention = sum_fields(w, h, &fields, 0.01)?;

        for (k, sal) in saliency.iter_mut().enumerate() {
            let mut srng = substream(seed, &[3, i as u64, k as u64]);
            let mut sf: Vec<Box<dyn Fn(usize, usize) -> f64>> = Vec::new();
            for p in &placed {
                let amp = if p.owner == Some(k) {
                    srng.random_range(0.8..1.2)
                } else {
                    srng.random_range(0.0..0.35)
                };
                sf.push(Box::new(blob(&p.box_sub, amp)));
                sf.push(Box::new(blob(&p.box_obj, amp)));
            }
            let distractor = random_box(&mut srng, w, h);
            sf.push(Box::new(blob(&distractor, srng.random_range(0.3..0.9))));
            sal.insert(id.clone(), sum_fields(w, h, &sf, 0.01)?);
        }

        let triplets = placed
            .into_iter()
            .map(|p| Triplet {
                pattern: p.pattern,
                box_sub: p.box_sub,
                box_obj: p.box_obj,
                h_sub: attention.clone(),
                h_obj: attention.clone(),
            })
            .collect();
        images.push(ImageRecord {
            id,
            size_bytes: spec.size_bytes,
            width: w,
            height: h,
            triplets,
        });
    }
    finish(images, queries, saliency)
}

fn synth_disagreeing(spec: &SynthSpec, queries: &[TripletPattern], seed: u64) -> Result<Dataset> {
    // Piecewise-constant fields. After normalisation both maps equal FLOOR on
    // the background, the detector map is 1 on query objects, and the
    // user's map is 1 on query subjects.
    const FLOOR: f64 = 0.3;
    let (w, h) = (spec.width, spec.height);
    let left = BBox::new(0, 0, w / 3, h);
    let right = BBox::new(w - w / 3, 0, w, h);
    let inside = |b: &BBox, x: usize, y: usize| x >= b.x0 && x < b.x1 && y >= b.y0 && y < b.y1;
    let mut images = Vec::with_capacity(spec.n_images);
    let mut saliency: Vec<BTreeMap<String, Heatmap>> = vec![BTreeMap::new(); queries.len()];
    for i in 0..spec.n_images {
        let mut rng = substream(seed, &[1, i as u64]);
        let id = format!("img{i:03}");
        let mut placed = draw_patterns(&mut rng, spec, queries, i, seed);
        let mid = BBox::new(w / 3, 0, w - w / 3, h);
        for p in &mut placed {
            if p.owner.is_some() {
                p.box_sub = BBox::new(1, h / 3, w / 3 - 1, 2 * h / 3);
                p.box_obj = BBox::new(w - w / 3 + 1, h / 3, w - 1, 2 * h / 3);
            } else {
                let bx = |r: &mut rand_chacha::ChaCha20Rng| {
                    let x0 = r.random_range(mid.x0..mid.x1 - 2);
                    let y0 = r.random_range(0..h - 3);
                    BBox::new(x0, y0, x0 + 2, y0 + 3)
                };
                p.box_sub = bx(&mut rng);
                p.box_obj = bx(&mut rng);
            }
        }
        let attention = Heatmap::from_fn(w, h, |x, y| if inside(&right, x, y) { 1.0 } else if inside(&left, x, y) { 0.0 } else { FLOOR })?;
        let user_map = Heatmap::from_fn(w, h, |x, y| if inside(&left, x, y) { 1.0 } else if inside(&right, x, y) { 0.0 } else { FLOOR })?;
        for sal in saliency.iter_mut() {
            sal.insert(id.clone(), user_map.clone());
        }
        let triplets = placed
            .into_iter()
            .map(|p| Triplet {
                pattern: p.pattern,
                box_sub: p.box_sub,
                box_obj: p.box_obj,
                h_sub: attention.clone(),
                h_obj: attention.clone(),
            })
            .collect();
        images.push(ImageRecord {
            id,
            size_bytes: spec.size_bytes,
            width: w,
            height: h,
            triplets,
        });
    }
    finish(images, queries, saliency)
}

fn finish(images: Vec<ImageRecord>, queries: &[TripletPattern], saliency: Vec<BTreeMap<String, Heatmap>>) -> Result<Dataset> {
    let users = queries
        .iter()
        .zip(saliency)
        .enumerate()
        .map(|(k, (q, s))| UserProfile {
            user_id: k as u32 + 1,
            query: q.clone(),
            saliency: s,
        })
        .collect();
    let ds = Dataset { images, users };
    ds.validate()?;
    Ok(ds)
}
