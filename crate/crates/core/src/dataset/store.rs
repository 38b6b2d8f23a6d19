//! Sample files on disk and whole-dataset generation.
//!
//! Each sample is one array file of rank 3 with dims `[2 + S, H, W]` and
//! dtype `f32`: channel 0 is the ground truth, channel 1 the low-pass
//! reconstruction, channels `2..` the enhanced sequence in ascending radius.

use std::fs;
use std::path::{Path, PathBuf};

use nalgebra::DMatrix;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::forward::DtnMatrix;
use crate::image::Image;
use crate::phantom::{generate_act4, generate_kit4, Act4Config, Kit4Config, Phantom, Style};

use super::format::{decode, stored_checksum, write_array, Array, ArrayData};
use super::manifest::{Manifest, ManifestEntry};
use super::sample::{make_sample, PipelineConfig, Sample, SampleMeta};

/// Images cover `[-1, 1)²`.
pub const IMAGE_HALF_WIDTH: f64 = 1.0;

pub fn sample_file_name(index: usize) -> String {
    format!("sample_{index:06}.dbar")
}

/// Training and validation counts used for each phantom family.
pub fn split_counts(style: Style) -> (usize, usize) {
    match style {
        Style::Kit4 => (3280, 820),
        Style::Act4 => (3200, 800),
    }
}

fn channels(sample: &Sample) -> impl Iterator<Item = &Image> {
    [&sample.ground_truth, &sample.low_pass]
        .into_iter()
        .chain(sample.enhanced.iter())
}

pub fn sample_to_array(sample: &Sample) -> Array {
    let (w, h) = (sample.ground_truth.width(), sample.ground_truth.height());
    let data: Vec<f32> = channels(sample)
        .flat_map(|img| img.values().iter().map(|&v| v as f32))
        .collect();
    Array {
        dims: vec![2 + sample.enhanced.len() as u32, h as u32, w as u32],
        data: ArrayData::F32(data),
    }
}

pub fn sample_from_array(array: Array, meta: SampleMeta, file: &Path) -> Result<Sample> {
    let format = |msg: String| Error::Format {
        file: file.to_path_buf(),
        msg,
    };
    let expected = [
        2 + meta.radii.len() as u32,
        meta.height as u32,
        meta.width as u32,
    ];
    if array.dims != expected {
        return Err(format(format!(
            "dims {:?} disagree with metadata {:?}",
            array.dims, expected
        )));
    }
    let ArrayData::F32(data) = array.data else {
        return Err(format("sample payload must be f32".into()));
    };
    let plane = meta.width * meta.height;
    let mut images = data.chunks_exact(plane).map(|chunk| {
        Image::new(
            meta.width,
            meta.height,
            IMAGE_HALF_WIDTH,
            chunk.iter().map(|&v| v as f64).collect(),
        )
    });
    let ground_truth = images.next().unwrap()?;
    let low_pass = images.next().unwrap()?;
    let enhanced = images.collect::<Result<Vec<_>>>()?;
    Ok(Sample {
        ground_truth,
        low_pass,
        enhanced,
        meta,
    })
}

/// DtN map as a rank-2 `f64` array of size `(2N + 1)²`.
pub fn dtn_to_array(dtn: &DtnMatrix) -> Array {
    let d = dtn.dim();
    Array {
        dims: vec![d as u32, d as u32],
        data: ArrayData::F64((0..d * d).map(|i| dtn.values[(i / d, i % d)]).collect()),
    }
}

pub fn dtn_from_array(array: Array, file: &Path) -> Result<DtnMatrix> {
    let ok = array.dims.len() == 2 && array.dims[0] == array.dims[1] && array.dims[0] % 2 == 1;
    match array.data {
        ArrayData::F64(values) if ok => {
            let d = array.dims[0] as usize;
            Ok(DtnMatrix {
                patterns: d / 2,
                values: DMatrix::from_row_slice(d, d, &values),
            })
        }
        _ => Err(Error::Format {
            file: file.to_path_buf(),
            msg: "expected an odd square f64 matrix".into(),
        }),
    }
}

/// Single image as a rank-2 `f32` array `[H, W]`.
pub fn image_to_array(image: &Image) -> Array {
    Array {
        dims: vec![image.height() as u32, image.width() as u32],
        data: ArrayData::F32(image.values().iter().map(|&v| v as f32).collect()),
    }
}

/// Images stored in an array file: a rank-2 file is one image, a rank-3
/// file one image per leading index.
pub fn images_from_array(array: Array, file: &Path) -> Result<Vec<Image>> {
    let format = |msg: &str| Error::Format {
        file: file.to_path_buf(),
        msg: msg.into(),
    };
    let (count, h, w) = match array.dims[..] {
        [h, w] => (1, h as usize, w as usize),
        [c, h, w] => (c as usize, h as usize, w as usize),
        _ => return Err(format("expected a rank-2 or rank-3 array")),
    };
    let values: Vec<f64> = match array.data {
        ArrayData::F32(v) => v.into_iter().map(f64::from).collect(),
        ArrayData::F64(v) => v,
        ArrayData::Complex32(_) => return Err(format("complex arrays are not images")),
    };
    if h == 0 || w == 0 {
        return Err(format("empty image"));
    }
    values
        .chunks_exact(h * w)
        .take(count)
        .map(|chunk| Image::new(w, h, IMAGE_HALF_WIDTH, chunk.to_vec()))
        .collect()
}

/// The sample as it reads back from disk: every value rounded to `f32`.
pub fn quantized(sample: &Sample) -> Sample {
    let round = |img: &Image| {
        Image::new(
            img.width(),
            img.height(),
            img.half_width(),
            img.values().iter().map(|&v| v as f32 as f64).collect(),
        )
        .unwrap()
    };
    Sample {
        ground_truth: round(&sample.ground_truth),
        low_pass: round(&sample.low_pass),
        enhanced: sample.enhanced.iter().map(round).collect(),
        meta: sample.meta.clone(),
    }
}

fn write_sample(dir: &Path, index: usize, sample: &Sample) -> Result<ManifestEntry> {
    let file = sample_file_name(index);
    let crc32 = write_array(&dir.join(&file), &sample_to_array(sample))?;
    Ok(ManifestEntry {
        file,
        crc32,
        meta: sample.meta.clone(),
    })
}

/// Writes every sample file, then commits the manifest in one atomic step.
pub fn write_dataset<I>(
    samples: I,
    dir: &Path,
    pipeline: Option<&PipelineConfig>,
) -> Result<Manifest>
where
    I: IntoIterator<Item = Sample>,
{
    fs::create_dir_all(dir)?;
    let entries = samples
        .into_iter()
        .enumerate()
        .map(|(i, s)| write_sample(dir, i, &s))
        .collect::<Result<Vec<_>>>()?;
    let manifest = Manifest {
        pipeline: pipeline.cloned(),
        entries,
    };
    manifest.write(dir)?;
    Ok(manifest)
}

/// Streams the samples listed in the manifest, verifying each file.
pub struct DatasetReader {
    dir: PathBuf,
    manifest: Manifest,
    next: usize,
}

impl DatasetReader {
    pub fn manifest(&self) -> &Manifest {
        &self.manifest
    }

    pub fn len(&self) -> usize {
        self.manifest.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.manifest.entries.is_empty()
    }

    pub fn read_entry(&self, entry: &ManifestEntry) -> Result<Sample> {
        let path = self.dir.join(&entry.file);
        let bytes = fs::read(&path)?;
        let array = decode(&bytes, &path)?;
        if stored_checksum(&bytes) != Some(entry.crc32) {
            return Err(Error::Checksum { file: path });
        }
        sample_from_array(array, entry.meta.clone(), &path)
    }
}

impl Iterator for DatasetReader {
    type Item = Result<Sample>;

    fn next(&mut self) -> Option<Self::Item> {
        let entry = self.manifest.entries.get(self.next)?;
        self.next += 1;
        Some(self.read_entry(entry))
    }
}

pub fn read_dataset(dir: &Path) -> Result<DatasetReader> {
    Ok(DatasetReader {
        dir: dir.to_path_buf(),
        manifest: Manifest::read(dir)?,
        next: 0,
    })
}

/// What to generate: `count` samples with seeds `first_seed, first_seed + 1, …`.
#[derive(Clone, Debug)]
pub struct DatasetSpec {
    pub style: Style,
    pub count: usize,
    pub first_seed: u64,
    pub pairing: Vec<(f64, f64)>,
    pub radii: Vec<f64>,
    pub level: u32,
    pub width: usize,
    pub pipeline: PipelineConfig,
    pub kit4: Kit4Config,
    pub act4: Act4Config,
}

impl DatasetSpec {
    pub fn new(style: Style, count: usize, first_seed: u64) -> Self {
        Self {
            style,
            count,
            first_seed,
            pairing: super::sample::DEFAULT_PAIRING.to_vec(),
            radii: super::sample::DEFAULT_RADII.to_vec(),
            level: crate::dbar::DEFAULT_LEVEL,
            width: super::sample::DEFAULT_WIDTH,
            pipeline: PipelineConfig::default(),
            kit4: Kit4Config::default(),
            act4: Act4Config::default(),
        }
    }

    pub fn seed(&self, index: usize) -> u64 {
        self.first_seed.wrapping_add(index as u64)
    }

    pub fn meta(&self, index: usize) -> Result<SampleMeta> {
        SampleMeta::draw(
            self.seed(index),
            self.style,
            &self.pairing,
            &self.radii,
            self.level,
            self.width,
        )
    }

    pub fn phantom(&self, index: usize) -> Result<Phantom> {
        let seed = self.seed(index);
        match self.style {
            Style::Kit4 => generate_kit4(seed, &self.kit4),
            Style::Act4 => generate_act4(seed, &self.act4),
        }
        .map_err(|e| e.in_stage("phantom"))
    }

    pub fn sample(&self, index: usize) -> Result<Sample> {
        make_sample(&self.phantom(index)?, &self.meta(index)?, &self.pipeline)
    }
}

/// An existing file that already holds a valid sample for this metadata.
fn completed(dir: &Path, index: usize, meta: &SampleMeta) -> Option<ManifestEntry> {
    let file = sample_file_name(index);
    let path = dir.join(&file);
    let bytes = fs::read(&path).ok()?;
    let array = decode(&bytes, &path).ok()?;
    let expected = [
        2 + meta.radii.len() as u32,
        meta.height as u32,
        meta.width as u32,
    ];
    (array.dims == expected).then(|| ManifestEntry {
        file,
        crc32: stored_checksum(&bytes).unwrap(),
        meta: meta.clone(),
    })
}

/// Generates samples in parallel and commits the manifest once all files
/// exist. With `resume`, valid files left by an earlier run are kept.
pub fn generate_dataset(spec: &DatasetSpec, dir: &Path, resume: bool) -> Result<Manifest> {
    fs::create_dir_all(dir)?;
    let entries = (0..spec.count)
        .into_par_iter()
        .map(|i| {
            let meta = spec.meta(i)?;
            if resume {
                if let Some(entry) = completed(dir, i, &meta) {
                    log::debug!("keeping {}", entry.file);
                    return Ok(entry);
                }
            }
            let sample = spec.sample(i)?;
            log::info!("sample {i} (seed {}) done", meta.seed);
            write_sample(dir, i, &sample)
        })
        .collect::<Result<Vec<_>>>()?;
    let manifest = Manifest {
        pipeline: Some(spec.pipeline.clone()),
        entries,
    };
    manifest.write(dir)?;
    Ok(manifest)
}
