use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::imaging::{io, BinaryMask, RasterImage};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PrimitiveKind {
    Line,
    Ellipse,
}

/// Annotated marking: its class and its centerline pixels `(row, col)` in raster order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GtPrimitive {
    pub kind: PrimitiveKind,
    pub name: String,
    pub pixels: Vec<(usize, usize)>,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ItemMetadata {
    pub stadium: String,
    pub camera: String,
    pub zoom: String,
}

/// One annotated image.
#[derive(Clone, Debug, PartialEq)]
pub struct DatasetItem {
    pub match_name: String,
    pub image_name: String,
    pub image: RasterImage,
    pub field: BinaryMask,
    /// Ground-truth line-marking pixels.
    pub lines: BinaryMask,
    pub primitives: Vec<GtPrimitive>,
    pub metadata: ItemMetadata,
}

impl DatasetItem {
    pub fn id(&self) -> String {
        format!("{}/{}", self.match_name, self.image_name)
    }

    pub fn dims(&self) -> (usize, usize) {
        self.image.dims()
    }

    /// Shared dimensions and primitives inside the frame and the field mask.
    pub fn validate(&self) -> Result<()> {
        let dims = self.image.dims();
        self.field.require_dims(dims)?;
        self.lines.require_dims(dims)?;
        for p in &self.primitives {
            if let Some(&(r, c)) = p.pixels.iter().find(|&&(r, c)| r >= dims.0 || c >= dims.1 || !self.field.get(r, c)) {
                return Err(Error::invalid(format!("primitive '{}' pixel ({r}, {c}) lies outside the field mask", p.name)));
            }
        }
        Ok(())
    }

    /// Ground-truth pixels of one class.
    pub fn class_mask(&self, kind: PrimitiveKind) -> BinaryMask {
        let (h, w) = self.dims();
        let mut m = BinaryMask::new(h, w);
        for p in self.primitives.iter().filter(|p| p.kind == kind) {
            for &(r, c) in &p.pixels {
                m.set(r, c, true);
            }
        }
        m
    }
}

/// On-disk annotation: primitives as horizontal pixel runs `[row, col, length]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnnotationFile {
    pub version: u32,
    pub height: usize,
    pub width: usize,
    pub metadata: ItemMetadata,
    pub primitives: Vec<AnnotatedPrimitive>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnnotatedPrimitive {
    pub kind: PrimitiveKind,
    #[serde(default)]
    pub name: String,
    pub runs: Vec<[usize; 3]>,
}

impl AnnotationFile {
    pub const VERSION: u32 = 1;
}

fn to_runs(pixels: &[(usize, usize)]) -> Vec<[usize; 3]> {
    let mut sorted = pixels.to_vec();
    sorted.sort_unstable();
    sorted.dedup();
    let mut runs: Vec<[usize; 3]> = Vec::new();
    for (r, c) in sorted {
        match runs.last_mut() {
            Some(run) if run[0] == r && run[1] + run[2] == c => run[2] += 1,
            _ => runs.push([r, c, 1]),
        }
    }
    runs
}

fn from_runs(runs: &[[usize; 3]]) -> Vec<(usize, usize)> {
    let mut pixels: Vec<_> = runs.iter().flat_map(|&[r, c, n]| (c..c + n).map(move |cc| (r, cc))).collect();
    pixels.sort_unstable();
    pixels.dedup();
    pixels
}

/// Paths of the four files of an item.
pub fn item_paths(dir: &Path, image_name: &str) -> [PathBuf; 4] {
    [
        dir.join(format!("{image_name}.png")),
        dir.join(format!("{image_name}.field.png")),
        dir.join(format!("{image_name}.lines.png")),
        dir.join(format!("{image_name}.primitives.json")),
    ]
}

/// Writes items in the `<root>/<match>/<image>.{png,field.png,lines.png,primitives.json}` layout.
pub fn write_dataset(root: impl AsRef<Path>, items: &[DatasetItem]) -> Result<()> {
    for item in items {
        item.validate()?;
        let dir = root.as_ref().join(&item.match_name);
        fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
        let [img, field, lines, ann] = item_paths(&dir, &item.image_name);
        io::save_image(&item.image, img)?;
        io::save_mask(&item.field, field)?;
        io::save_mask(&item.lines, lines)?;
        let (h, w) = item.dims();
        let doc = AnnotationFile {
            version: AnnotationFile::VERSION,
            height: h,
            width: w,
            metadata: item.metadata.clone(),
            primitives: item
                .primitives
                .iter()
                .map(|p| AnnotatedPrimitive { kind: p.kind, name: p.name.clone(), runs: to_runs(&p.pixels) })
                .collect(),
        };
        let text = serde_json::to_string_pretty(&doc).map_err(|e| Error::Format { path: ann.clone(), message: e.to_string() })?;
        fs::write(&ann, text + "\n").map_err(|e| Error::io(&ann, e))?;
    }
    Ok(())
}

/// Loads one item; all errors name the offending file.
pub fn load_item(dir: &Path, match_name: &str, image_name: &str) -> Result<DatasetItem> {
    let [img, field, lines, ann] = item_paths(dir, image_name);
    let image = io::load_rgb(&img)?;
    let field_mask = io::load_mask(&field)?;
    let line_mask = io::load_mask(&lines)?;
    let dims = image.dims();
    for (mask, path) in [(&field_mask, &field), (&line_mask, &lines)] {
        if mask.dims() != dims {
            return Err(Error::Format { path: path.clone(), message: format!("size {:?} differs from image {:?}", mask.dims(), dims) });
        }
    }
    let text = fs::read_to_string(&ann).map_err(|e| Error::io(&ann, e))?;
    let doc: AnnotationFile = serde_json::from_str(&text).map_err(|e| Error::Format { path: ann.clone(), message: e.to_string() })?;
    if doc.version != AnnotationFile::VERSION || (doc.height, doc.width) != dims {
        return Err(Error::Format { path: ann, message: "unsupported version or size mismatch".into() });
    }
    let item = DatasetItem {
        match_name: match_name.into(),
        image_name: image_name.into(),
        image,
        field: field_mask,
        lines: line_mask,
        primitives: doc
            .primitives
            .iter()
            .map(|p| GtPrimitive { kind: p.kind, name: p.name.clone(), pixels: from_runs(&p.runs) })
            .collect(),
        metadata: doc.metadata,
    };
    item.validate().map_err(|e| Error::Format { path: ann, message: e.to_string() })?;
    Ok(item)
}

/// A file-level problem found while loading a dataset.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct LoadError {
    pub item: String,
    pub message: String,
}

#[derive(Clone, Debug, Default)]
pub struct Dataset {
    pub items: Vec<DatasetItem>,
    pub errors: Vec<LoadError>,
}

fn sorted_entries(dir: &Path) -> Result<Vec<PathBuf>> {
    let mut v: Vec<PathBuf> = fs::read_dir(dir)
        .map_err(|e| Error::io(dir, e))?
        .map(|e| e.map(|e| e.path()).map_err(|e| Error::io(dir, e)))
        .collect::<Result<_>>()?;
    v.sort();
    Ok(v)
}

/// Loads every item under `root`, in sorted match/image order. Malformed
/// items are reported in `errors` and skipped.
pub fn load_dataset(root: impl AsRef<Path>) -> Result<Dataset> {
    let root = root.as_ref();
    let mut out = Dataset::default();
    for dir in sorted_entries(root)?.into_iter().filter(|p| p.is_dir()) {
        let match_name = dir.file_name().unwrap_or_default().to_string_lossy().into_owned();
        for file in sorted_entries(&dir)? {
            let name = file.file_name().unwrap_or_default().to_string_lossy().into_owned();
            let Some(stem) = name.strip_suffix(".png") else { continue };
            if stem.ends_with(".field") || stem.ends_with(".lines") || stem.contains('.') {
                continue;
            }
            match load_item(&dir, &match_name, stem) {
                Ok(item) => out.items.push(item),
                Err(e) => out.errors.push(LoadError { item: format!("{match_name}/{stem}"), message: e.to_string() }),
            }
        }
    }
    Ok(out)
}
