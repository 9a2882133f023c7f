//! Seeded synthetic corpora with planted topic sequences.
//!
//! Each modality draws one shared offset vector and one centroid per topic.
//! A segment row is `offset + informativeness * centroid[topic] + noise`, so
//! an informativeness of 0 leaves only the offset and noise. Transcripts mix
//! topic-specific tokens with shared filler words.

use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use ndarray::Array2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};
use vidtopic_core::cluster::guided::default_seed_topics;
use vidtopic_core::cluster::EmbeddingSource;
use vidtopic_core::corpus::{write_embeddings, write_segments, EmbeddingMatrix, Modality, Segment, VideoCorpus};

use crate::config::{EvaluationConfig, PipelineConfig, SourceSpec, VideoSpec};
use crate::error::{PipelineError, Result};

const EXTRA_WORDS: [[&str; 4]; 15] = [
    ["troops", "ceasefire", "missile", "frontline"],
    ["vote", "ballot", "campaign", "coalition"],
    ["memorial", "treaty", "anniversary", "veterans"],
    ["inflation", "exports", "budget", "prices"],
    ["emissions", "drought", "flooding", "renewable"],
    ["software", "startup", "robots", "internet"],
    ["hospital", "doctors", "infection", "patients"],
    ["museum", "festival", "theatre", "concert"],
    ["football", "championship", "coach", "league"],
    ["teachers", "students", "exams", "classroom"],
    ["protest", "court", "rights", "lawyers"],
    ["migrants", "camp", "deportation", "smugglers"],
    ["laboratory", "scientists", "study", "physics"],
    ["rocket", "satellite", "orbit", "telescope"],
    ["minister", "summit", "cabinet", "reform"],
];

const FILLER: [&str; 16] = [
    "today", "report", "people", "country", "government", "week", "city", "officials", "said",
    "new", "year", "according", "news", "evening", "state", "also",
];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Informativeness {
    pub text: f64,
    pub audio: f64,
    pub visual: f64,
}

impl FromStr for Informativeness {
    type Err = PipelineError;

    /// Parses `text=0.2,audio=0.5,visual=1`; omitted modalities default to 1.
    fn from_str(s: &str) -> Result<Self> {
        let mut out = Informativeness {
            text: 1.0,
            audio: 1.0,
            visual: 1.0,
        };
        for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
            let (k, v) = part
                .split_once('=')
                .ok_or_else(|| PipelineError::Config(format!("expected name=value, got {part:?}")))?;
            let v: f64 = v
                .trim()
                .parse()
                .map_err(|_| PipelineError::Config(format!("bad informativeness {v:?}")))?;
            if !(v.is_finite() && v >= 0.0) {
                return Err(PipelineError::Config(format!("informativeness must be >= 0, got {v}")));
            }
            match k.trim() {
                "text" => out.text = v,
                "audio" => out.audio = v,
                "visual" => out.visual = v,
                other => return Err(PipelineError::Config(format!("unknown modality {other:?}"))),
            }
        }
        Ok(out)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthParams {
    pub seed: u64,
    pub videos: usize,
    pub segments: usize,
    pub topics: usize,
    pub inform: Informativeness,
    pub text_dims: usize,
    pub audio_dims: usize,
    pub visual_dims: usize,
    /// Per-coordinate noise standard deviation.
    pub noise: f64,
    /// Scale of the shared per-modality offset.
    pub offset: f64,
    /// Inclusive bounds on planted run lengths, in segments.
    pub min_run: usize,
    pub max_run: usize,
    /// Probability that a transcript token comes from the topic's pool.
    pub topic_word_rate: f64,
}

impl Default for SynthParams {
    fn default() -> Self {
        SynthParams {
            seed: 0,
            videos: 10,
            segments: 60,
            topics: 4,
            inform: Informativeness {
                text: 1.0,
                audio: 1.0,
                visual: 1.0,
            },
            text_dims: 32,
            audio_dims: 24,
            visual_dims: 16,
            noise: 0.25,
            offset: 2.0,
            min_run: 5,
            max_run: 15,
            topic_word_rate: 0.6,
        }
    }
}

impl SynthParams {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("videos", self.videos),
            ("segments", self.segments),
            ("topics", self.topics),
            ("text_dims", self.text_dims),
            ("audio_dims", self.audio_dims),
            ("visual_dims", self.visual_dims),
            ("min_run", self.min_run),
        ];
        if let Some((name, _)) = positive.iter().find(|(_, v)| *v == 0) {
            return Err(PipelineError::Config(format!("{name} must be positive")));
        }
        if self.max_run < self.min_run {
            return Err(PipelineError::Config("max_run must be >= min_run".into()));
        }
        if !(self.noise >= 0.0 && self.offset >= 0.0) {
            return Err(PipelineError::Config("noise and offset must be >= 0".into()));
        }
        if !(0.0..=1.0).contains(&self.topic_word_rate) {
            return Err(PipelineError::Config("topic_word_rate must lie in [0, 1]".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct SyntheticVideo {
    /// All three modalities attached.
    pub corpus: VideoCorpus,
    pub truth: Vec<i64>,
}

#[derive(Debug, Clone)]
pub struct SyntheticCorpus {
    pub params: SynthParams,
    pub videos: Vec<SyntheticVideo>,
    /// Word vectors in text-embedding space for every transcript token.
    pub word_vectors: Vec<(String, Vec<f64>)>,
}

/// Token pool of topic `t`.
pub fn topic_words(t: usize) -> Vec<String> {
    let seeds = default_seed_topics::<f64>();
    let theme = t % seeds.len();
    let suffix = if t < seeds.len() { String::new() } else { (t / seeds.len()).to_string() };
    seeds[theme]
        .words
        .iter()
        .filter(|w| !w.contains(' '))
        .map(String::as_str)
        .chain(EXTRA_WORDS[theme])
        .map(|w| format!("{w}{suffix}"))
        .collect()
}

fn gaussian(rng: &mut ChaCha8Rng, n: usize, scale: f64) -> Vec<f64> {
    (0..n)
        .map(|_| scale * <StandardNormal as Distribution<f64>>::sample(&StandardNormal, rng))
        .collect()
}

struct ModalityModel {
    modality: Modality,
    offset: Vec<f64>,
    centroids: Vec<Vec<f64>>,
    inform: f64,
}

impl ModalityModel {
    fn new(rng: &mut ChaCha8Rng, modality: Modality, dims: usize, p: &SynthParams, inform: f64) -> Self {
        let offset = gaussian(rng, dims, p.offset);
        let centroids = (0..p.topics).map(|_| gaussian(rng, dims, 1.0)).collect();
        ModalityModel {
            modality,
            offset,
            centroids,
            inform,
        }
    }

    fn sample(&self, rng: &mut ChaCha8Rng, truth: &[i64], noise: f64) -> Array2<f64> {
        let d = self.offset.len();
        let mut out = Array2::zeros((truth.len(), d));
        for (i, &t) in truth.iter().enumerate() {
            let e = gaussian(rng, d, noise);
            let c = &self.centroids[t as usize];
            for j in 0..d {
                out[(i, j)] = self.offset[j] + self.inform * c[j] + e[j];
            }
        }
        out
    }
}

fn planted_sequence(rng: &mut ChaCha8Rng, p: &SynthParams) -> Vec<i64> {
    let mut out = Vec::with_capacity(p.segments);
    let mut current: Option<usize> = None;
    while out.len() < p.segments {
        let t = match current {
            Some(c) if p.topics > 1 => (c + rng.gen_range(1..p.topics)) % p.topics,
            _ => rng.gen_range(0..p.topics),
        };
        let len = rng.gen_range(p.min_run..=p.max_run);
        out.extend(std::iter::repeat(t as i64).take(len));
        current = Some(t);
    }
    out.truncate(p.segments);
    out
}

fn transcript(rng: &mut ChaCha8Rng, pool: &[String], rate: f64) -> String {
    let sentences = rng.gen_range(1..=2);
    let mut parts = Vec::with_capacity(sentences);
    for _ in 0..sentences {
        let n = rng.gen_range(6..=9);
        let words: Vec<&str> = (0..n)
            .map(|_| {
                if rng.gen_bool(rate) {
                    pool[rng.gen_range(0..pool.len())].as_str()
                } else {
                    FILLER[rng.gen_range(0..FILLER.len())]
                }
            })
            .collect();
        let mut s = words.join(" ");
        if let Some(first) = s.get_mut(0..1) {
            first.make_ascii_uppercase();
        }
        s.push('.');
        parts.push(s);
    }
    parts.join(" ")
}

pub fn make_synthetic_corpus(p: &SynthParams) -> Result<SyntheticCorpus> {
    p.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(p.seed);
    let text = ModalityModel::new(&mut rng, Modality::Text, p.text_dims, p, p.inform.text);
    let audio = ModalityModel::new(&mut rng, Modality::Audio, p.audio_dims, p, p.inform.audio);
    let visual = ModalityModel::new(&mut rng, Modality::Visual, p.visual_dims, p, p.inform.visual);
    let pools: Vec<Vec<String>> = (0..p.topics).map(topic_words).collect();

    let mut videos = Vec::with_capacity(p.videos);
    for v in 0..p.videos {
        let id = format!("v{v:03}");
        let truth = planted_sequence(&mut rng, p);
        let mut t = 0.0;
        let segments: Vec<Segment> = truth
            .iter()
            .enumerate()
            .map(|(i, &topic)| {
                let start = t;
                t += rng.gen_range(3.0..9.0_f64);
                t = (t * 1000.0).round() / 1000.0;
                Segment {
                    video_id: id.clone(),
                    index: i,
                    t_start: start,
                    t_end: t,
                    text: transcript(&mut rng, &pools[topic as usize], p.topic_word_rate),
                }
            })
            .collect();
        let mut corpus = VideoCorpus::new(id, segments);
        for m in [&text, &audio, &visual] {
            let x = m.sample(&mut rng, &truth, p.noise);
            corpus.attach(EmbeddingMatrix::from_array(m.modality, "synthetic", &x)?)?;
        }
        videos.push(SyntheticVideo { corpus, truth });
    }

    let mut word_vectors = Vec::new();
    for (topic, pool) in pools.iter().enumerate() {
        for w in pool {
            let e = gaussian(&mut rng, p.text_dims, 0.5);
            let v = text.centroids[topic].iter().zip(e).map(|(c, e)| c + e).collect();
            word_vectors.push((w.clone(), v));
        }
    }
    for w in FILLER {
        word_vectors.push((w.to_string(), gaussian(&mut rng, p.text_dims, 1.0)));
    }
    // unplanted themes still resolve as seeds
    for t in p.topics..default_seed_topics::<f64>().len() {
        for w in topic_words(t) {
            word_vectors.push((w, gaussian(&mut rng, p.text_dims, 1.0)));
        }
    }
    Ok(SyntheticCorpus {
        params: p.clone(),
        videos,
        word_vectors,
    })
}

/// Writes the corpus and a ready-to-run config; returns the config path.
///
/// Layout: `videos/<id>/{segments.jsonl,text.emb1,audio.emb1,visual.emb1}`,
/// `truth.json`, `word_vectors.txt`, `synth.json` and `config.yaml`.
pub fn write_synthetic_corpus(c: &SyntheticCorpus, dir: &Path) -> Result<PathBuf> {
    let io = |p: &Path, e| PipelineError::io(p, e);
    let mut specs = Vec::new();
    let mut truth = BTreeMap::new();
    for v in &c.videos {
        let id = &v.corpus.video_id;
        let rel = PathBuf::from("videos").join(id);
        let vdir = dir.join(&rel);
        fs::create_dir_all(&vdir).map_err(|e| io(&vdir, e))?;
        let seg_path = vdir.join("segments.jsonl");
        let f = fs::File::create(&seg_path).map_err(|e| io(&seg_path, e))?;
        write_segments(std::io::BufWriter::new(f), &v.corpus.segments).map_err(|e| io(&seg_path, e))?;
        let mut spec = VideoSpec {
            id: id.clone(),
            segments: rel.join("segments.jsonl"),
            text: None,
            audio: None,
            visual: None,
        };
        for m in [Modality::Text, Modality::Audio, Modality::Visual] {
            let name = format!("{m}.emb1");
            write_embeddings(&vdir.join(&name), v.corpus.require(m)?)?;
            let src = Some(SourceSpec {
                file: Some(rel.join(&name)),
                ..SourceSpec::default()
            });
            match m {
                Modality::Text => spec.text = src,
                Modality::Audio => spec.audio = src,
                _ => spec.visual = src,
            }
        }
        specs.push(spec);
        truth.insert(id.clone(), v.truth.clone());
    }

    let wv_path = dir.join("word_vectors.txt");
    let mut f = std::io::BufWriter::new(fs::File::create(&wv_path).map_err(|e| io(&wv_path, e))?);
    for (w, v) in &c.word_vectors {
        let nums: Vec<String> = v.iter().map(|x| format!("{x:.6}")).collect();
        writeln!(f, "{w} {}", nums.join(" ")).map_err(|e| io(&wv_path, e))?;
    }
    f.flush().map_err(|e| io(&wv_path, e))?;

    let write = |name: &str, bytes: Vec<u8>| {
        let p = dir.join(name);
        fs::write(&p, bytes).map_err(|e| io(&p, e))
    };
    write("truth.json", serde_json::to_vec_pretty(&truth).expect("truth serializes"))?;
    write("synth.json", serde_json::to_vec_pretty(&c.params).expect("params serialize"))?;

    let config = PipelineConfig {
        mode: EmbeddingSource::Full,
        output: PathBuf::from("out"),
        workers: None,
        videos: specs,
        word_vectors: Some(PathBuf::from("word_vectors.txt")),
        seeds: Default::default(),
        stopwords: None,
        fusion_weights: Default::default(),
        frame_selection: Default::default(),
        topic_model: Default::default(),
        diagnostics: Default::default(),
        summary: Default::default(),
        evaluation: EvaluationConfig {
            spaces: Some(vec![Modality::Text, Modality::Audio, Modality::Visual]),
            exclude_outlier_transitions: false,
        },
        http: Default::default(),
        base_dir: dir.to_path_buf(),
    };
    let path = dir.join("config.yaml");
    write("config.yaml", config.to_yaml().into_bytes())?;
    Ok(path)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn informativeness_parsing() {
        let i: Informativeness = "text=0.2, visual=1".parse().unwrap();
        assert_eq!(i, Informativeness { text: 0.2, audio: 1.0, visual: 1.0 });
        assert!("smell=1".parse::<Informativeness>().is_err());
        assert!("text=-1".parse::<Informativeness>().is_err());
        assert!("text".parse::<Informativeness>().is_err());
    }

    #[test]
    fn runs_respect_bounds() {
        let p = SynthParams { segments: 200, ..SynthParams::default() };
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let seq = planted_sequence(&mut rng, &p);
        assert_eq!(seq.len(), 200);
        let mut runs = Vec::new();
        let mut len = 1;
        for w in seq.windows(2) {
            if w[0] == w[1] {
                len += 1;
            } else {
                runs.push(len);
                len = 1;
            }
        }
        assert!(runs.iter().all(|&r| (5..=15).contains(&r)), "{runs:?}");
    }

    #[test]
    fn pools_are_distinct_beyond_the_theme_list() {
        assert_ne!(topic_words(0), topic_words(15));
        assert!(topic_words(0).contains(&"war".to_string()));
    }
}
