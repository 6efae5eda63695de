//! Deterministic synthetic cards.
//!
//! Stand-ins for photographed KTPs: a flat card background, a cartoon
//! portrait that the fixture cascade recognises, text-like marks where the
//! words sit, and a frozen word dump per card carrying the kinds of misreads
//! the repair rules target. Some misreads are deliberately beyond repair so
//! the evaluation is not trivially perfect.

use std::collections::BTreeMap;
use std::path::Path;

use image::{Rgb, RgbImage};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::Result;
use crate::eval::{CaptureKind, GoldAnnotation};
use crate::facedet::{CascadeModel, FaceBox};
use crate::ocr::{write_word_dump, OcrDocument, OcrSource, OcrWord, WordBox};
use crate::preproc::RasterImage;

pub const CARD_BACKGROUND: [u8; 3] = [170, 200, 230];
pub const SKIN: [u8; 3] = [230, 190, 160];
pub const HAIR: [u8; 3] = [40, 30, 30];
pub const EYE: [u8; 3] = [30, 30, 40];
pub const MOUTH: [u8; 3] = [120, 40, 40];
pub const INK: [u8; 3] = [50, 50, 60];

pub const CARD_WIDTH: u32 = 480;
pub const CARD_HEIGHT: u32 = 302;

/// Colour of the portrait at grid cell `(u, v)` of a 24x24 layout.
fn face_colour(u: u32, v: u32) -> [u8; 3] {
    if v < 4 {
        HAIR
    } else if (9..12).contains(&v) && ((5..10).contains(&u) || (14..19).contains(&u)) {
        EYE
    } else if (17..19).contains(&v) && (8..16).contains(&u) {
        MOUTH
    } else {
        SKIN
    }
}

/// Paints a `size`x`size` portrait with its top-left corner at `(left, top)`.
pub fn draw_face(canvas: &mut RgbImage, left: u32, top: u32, size: u32) {
    for dy in 0..size {
        for dx in 0..size {
            let c = face_colour(dx * 24 / size, dy * 24 / size);
            canvas.put_pixel(left + dx, top + dy, Rgb(c));
        }
    }
}

pub fn card_canvas(width: u32, height: u32) -> RgbImage {
    RgbImage::from_pixel(width, height, Rgb(CARD_BACKGROUND))
}

pub fn blank_card(width: u32, height: u32) -> RasterImage {
    to_raster(card_canvas(width, height))
}

/// Plain card with one portrait.
pub fn face_on_card(width: u32, height: u32, left: u32, top: u32, size: u32) -> RasterImage {
    let mut canvas = card_canvas(width, height);
    draw_face(&mut canvas, left, top, size);
    to_raster(canvas)
}

pub fn to_raster(canvas: RgbImage) -> RasterImage {
    RasterImage::from_dynamic(image::DynamicImage::ImageRgb8(canvas)).expect("rgb8 canvas")
}

/// Ground truth printed on one synthetic card.
#[derive(Debug, Clone)]
pub struct CardSpec {
    pub card_id: &'static str,
    pub capture_kind: CaptureKind,
    pub province: &'static str,
    pub city: &'static str,
    pub nik: &'static str,
    pub name: &'static str,
    pub birth_place: &'static str,
    pub birth_date: &'static str,
    pub gender: &'static str,
    pub blood_type: &'static str,
    pub street: &'static str,
    pub rt_rw: &'static str,
    pub village: &'static str,
    pub district: &'static str,
    pub religion: &'static str,
    pub marital: &'static str,
    pub occupation: &'static str,
    pub expiry: &'static str,
    pub issue_place: &'static str,
    pub issue_date: &'static str,
    /// Misreads as `(line, printed word, read word)`. A read word of `""`
    /// drops the printed word; a printed word of `"*"` drops the whole line
    /// from the dump while it stays on the card.
    pub misreads: &'static [(&'static str, &'static str, &'static str)],
}

const WORD_GAP: u32 = 6;
const CHAR_W: u32 = 6;
const LINE_H: u32 = 10;
const LABEL_X: u32 = 14;
const COLON_X: u32 = 120;
const VALUE_X: u32 = 130;
const FACE_LEFT: u32 = 352;
const FACE_TOP: u32 = 64;

/// Faces are planted at pyramid sizes `round(24 * 1.1^k)`.
fn face_size(index: usize) -> u32 {
    let k = 12 + (index % 4) as i32;
    (24.0 * 1.1f64.powi(k)).round() as u32
}

struct Line {
    tag: &'static str,
    block: u32,
    x: u32,
    y: u32,
    /// Words before the colon, if the line is labelled.
    label: Vec<String>,
    value: Vec<String>,
}

fn words(s: &str) -> Vec<String> {
    s.split_whitespace().map(str::to_string).collect()
}

fn lines_of(spec: &CardSpec) -> Vec<Line> {
    let headline = |tag, y, text: String| {
        let w = text.len() as u32 * CHAR_W;
        Line {
            tag,
            block: 1,
            x: (CARD_WIDTH - w) / 2,
            y,
            label: vec![],
            value: words(&text),
        }
    };
    let mut out = vec![
        headline("province", 10, format!("PROVINSI {}", spec.province)),
        headline("city", 26, spec.city.to_string()),
    ];
    let gender_line = format!("{} Gol. Darah : {}", spec.gender, spec.blood_type);
    let fields: [(&str, &str, String); 13] = [
        ("nik", "NIK", spec.nik.to_string()),
        ("name", "Nama", spec.name.to_string()),
        (
            "birth",
            "Tempat/Tgl Lahir",
            format!("{}, {}", spec.birth_place, spec.birth_date),
        ),
        ("gender", "Jenis Kelamin", gender_line),
        ("address", "Alamat", spec.street.to_string()),
        ("rtrw", "RT/RW", spec.rt_rw.to_string()),
        ("village", "Kel/Desa", spec.village.to_string()),
        ("district", "Kecamatan", spec.district.to_string()),
        ("religion", "Agama", spec.religion.to_string()),
        ("marital", "Status Perkawinan", spec.marital.to_string()),
        ("occupation", "Pekerjaan", spec.occupation.to_string()),
        ("nationality", "Kewarganegaraan", "WNI".to_string()),
        ("expiry", "Berlaku Hingga", spec.expiry.to_string()),
    ];
    for (i, (tag, label, value)) in fields.into_iter().enumerate() {
        out.push(Line {
            tag,
            block: 2,
            x: LABEL_X,
            y: 50 + i as u32 * 18,
            label: words(label),
            value: words(&value),
        });
    }
    let below = FACE_TOP + face_size(3) + 16;
    out.push(Line {
        tag: "place",
        block: 3,
        x: FACE_LEFT + 4,
        y: below,
        label: vec![],
        value: words(spec.issue_place),
    });
    out.push(Line {
        tag: "issued",
        block: 3,
        x: FACE_LEFT + 4,
        y: below + 16,
        label: vec![],
        value: words(spec.issue_date),
    });
    out
}

/// Printed and read text for one word.
struct Placed {
    printed: String,
    read: String,
    bbox: WordBox,
    block: u32,
    line: u32,
    word: u32,
}

fn layout(spec: &CardSpec) -> Vec<Placed> {
    let mut placed = Vec::new();
    let mut line_ids: BTreeMap<u32, u32> = BTreeMap::new();
    for line in lines_of(spec) {
        let dropped = spec.misreads.iter().any(|(t, w, _)| *t == line.tag && *w == "*");
        let line_id = {
            let n = line_ids.entry(line.block).or_insert(0);
            *n += 1;
            *n
        };
        let mut tokens: Vec<(u32, String)> = Vec::new();
        let mut x = line.x;
        for w in &line.label {
            tokens.push((x, w.clone()));
            x += w.len() as u32 * CHAR_W + WORD_GAP;
        }
        if !line.label.is_empty() {
            tokens.push((COLON_X, ":".into()));
            x = VALUE_X;
        }
        for w in &line.value {
            tokens.push((x, w.clone()));
            x += w.len() as u32 * CHAR_W + WORD_GAP;
        }
        for (i, (x, printed)) in tokens.into_iter().enumerate() {
            let read = if dropped {
                String::new()
            } else {
                spec.misreads
                    .iter()
                    .find(|(t, w, _)| *t == line.tag && *w == printed)
                    .map(|(_, _, r)| r.to_string())
                    .unwrap_or_else(|| printed.clone())
            };
            let word_id = i as u32 + 1;
            placed.push(Placed {
                bbox: WordBox {
                    left: x,
                    top: line.y,
                    width: printed.chars().count() as u32 * CHAR_W,
                    height: LINE_H,
                },
                printed,
                read,
                block: line.block,
                line: line_id,
                word: word_id,
            });
        }
    }
    placed
}

/// Deterministic per-card generator.
fn rng_for(index: usize) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(0x4b54_5058_0000 + index as u64)
}

fn word_confidence(rng: &mut ChaCha8Rng, kind: CaptureKind, misread: bool) -> u8 {
    match (misread, kind) {
        (true, _) => rng.random_range(30..=75),
        (false, CaptureKind::Scanner) => rng.random_range(86..=97),
        (false, CaptureKind::Camera) => rng.random_range(74..=96),
    }
}

fn dump_for(spec: &CardSpec, placed: &[Placed], index: usize) -> Result<String> {
    let mut rng = rng_for(index);
    let mut words = Vec::new();
    for p in placed {
        if p.read.is_empty() {
            continue;
        }
        let misread = p.read != p.printed;
        let mut confidence = word_confidence(&mut rng, spec.capture_kind, misread);
        if let Some(fixed) = pinned_confidence(spec, p) {
            confidence = fixed;
        }
        words.push(OcrWord {
            text: p.read.clone(),
            confidence,
            bbox: p.bbox,
            block_id: p.block,
            paragraph_id: 1,
            line_id: p.line,
            word_id: p.word,
        });
    }
    let doc = OcrDocument::from_words(words, OcrSource::DumpFile)?;
    Ok(write_word_dump(&doc))
}

/// The first card's province line carries the per-word confidences of the
/// worked example (92, 89, 91 for the province name).
fn pinned_confidence(spec: &CardSpec, p: &Placed) -> Option<u8> {
    if spec.card_id != "card01" || p.block != 1 || p.line != 1 {
        return None;
    }
    match p.printed.as_str() {
        "PROVINSI" | "DAERAH" => Some(92),
        "ISTIMEWA" => Some(89),
        "YOGYAKARTA" => Some(91),
        _ => None,
    }
}

fn draw_word(canvas: &mut RgbImage, b: &WordBox, chars: u32) {
    for c in 0..chars {
        let x0 = b.left + c * CHAR_W;
        for dy in 1..b.height - 1 {
            for dx in 1..CHAR_W - 2 {
                let stroke = dx == 1 || dy == 1 || dy == b.height - 2 || (c % 3 == 0 && dx == 2);
                if stroke {
                    canvas.put_pixel(x0 + dx, b.top + dy, Rgb(INK));
                }
            }
        }
    }
}

/// Uneven lighting and sensor noise for camera captures.
fn camera_effects(canvas: &mut RgbImage, rng: &mut ChaCha8Rng) {
    let (w, h) = canvas.dimensions();
    for y in 0..h {
        for x in 0..w {
            let shade = (x as i32 * 24 / w as i32) - 12 + (y as i32 * 8 / h as i32) - 4;
            let noise: i32 = rng.random_range(-5..=5);
            let p = canvas.get_pixel_mut(x, y);
            for ch in p.0.iter_mut() {
                *ch = (*ch as i32 + shade + noise).clamp(0, 255) as u8;
            }
        }
    }
}

fn render(spec: &CardSpec, placed: &[Placed], index: usize, face: FaceBox) -> Result<Vec<u8>> {
    let mut canvas = card_canvas(CARD_WIDTH, CARD_HEIGHT);
    for p in placed {
        draw_word(&mut canvas, &p.bbox, p.printed.chars().count() as u32);
    }
    draw_face(&mut canvas, face.left, face.top, face.width);
    if spec.capture_kind == CaptureKind::Camera {
        let mut rng = rng_for(index + 1000);
        camera_effects(&mut canvas, &mut rng);
    }
    to_raster(canvas).encode_png()
}

fn gold_for(spec: &CardSpec) -> GoldAnnotation {
    let (rt, rw) = spec.rt_rw.split_once('/').expect("rt/rw");
    let gender = if spec.gender == "PEREMPUAN" { "F" } else { "M" };
    let marital = match spec.marital {
        "KAWIN" => "M",
        "BELUM KAWIN" => "S",
        "CERAI HIDUP" => "D",
        _ => "W",
    };
    let address = format!(
        "{} RT : {rt} RW : {rw} KELURAHAN/DESA : {} KECAMATAN : {}",
        spec.street, spec.village, spec.district
    );
    let expected: BTreeMap<String, String> = [
        ("identifier", spec.nik.to_string()),
        ("name", spec.name.to_string()),
        ("birthPlace", spec.birth_place.to_string()),
        ("birthDate", spec.birth_date.to_string()),
        ("gender", gender.to_string()),
        ("bloodType", spec.blood_type.to_string()),
        ("address", address),
        ("religion", spec.religion.to_string()),
        ("marriageStatus", marital.to_string()),
        ("occupation", spec.occupation.to_string()),
        ("nationalityCode", "IND".to_string()),
        ("expiryDate", spec.expiry.to_string()),
        ("issuedProvince", spec.province.to_string()),
        ("issuedCity", spec.city.to_string()),
        ("issuedDate", spec.issue_date.to_string()),
    ]
    .into_iter()
    .map(|(k, v)| (k.to_string(), v))
    .collect();
    GoldAnnotation {
        card_id: spec.card_id.to_string(),
        capture_kind: spec.capture_kind,
        expected,
    }
}

/// One rendered card with its frozen word dump and gold annotation.
#[derive(Debug, Clone)]
pub struct FixtureCard {
    pub card_id: String,
    pub png: Vec<u8>,
    pub dump: String,
    pub gold: GoldAnnotation,
    pub face: FaceBox,
}

pub fn fixture_card(spec: &CardSpec, index: usize) -> Result<FixtureCard> {
    let placed = layout(spec);
    let size = face_size(index);
    let face = FaceBox::new(
        FACE_LEFT + (index as u32 % 3) * 3,
        FACE_TOP + (index as u32 % 2) * 2,
        size,
        size,
    );
    Ok(FixtureCard {
        card_id: spec.card_id.to_string(),
        png: render(spec, &placed, index, face)?,
        dump: dump_for(spec, &placed, index)?,
        gold: gold_for(spec),
        face,
    })
}

pub fn fixture_cards() -> Result<Vec<FixtureCard>> {
    CARDS.iter().enumerate().map(|(i, s)| fixture_card(s, i)).collect()
}

/// Writes `<id>.png`, `<id>.tsv`, `gold.json` and `cascade.json` into `dir`.
pub fn write_fixtures(dir: &Path) -> Result<Vec<FixtureCard>> {
    std::fs::create_dir_all(dir)?;
    let cards = fixture_cards()?;
    for c in &cards {
        std::fs::write(dir.join(format!("{}.png", c.card_id)), &c.png)?;
        std::fs::write(dir.join(format!("{}.tsv", c.card_id)), &c.dump)?;
    }
    let gold: Vec<&GoldAnnotation> = cards.iter().map(|c| &c.gold).collect();
    let mut json = serde_json::to_string_pretty(&gold)?;
    json.push('\n');
    std::fs::write(dir.join("gold.json"), json)?;
    let mut cascade = CascadeModel::synthetic_face().to_json();
    cascade.push('\n');
    std::fs::write(dir.join("cascade.json"), cascade)?;
    Ok(cards)
}

use CaptureKind::{Camera, Scanner};

pub const CARDS: [CardSpec; 10] = [
    CardSpec {
        card_id: "card01",
        capture_kind: Scanner,
        province: "DAERAH ISTIMEWA YOGYAKARTA",
        city: "KABUPATEN SLEMAN",
        nik: "3471111111111111",
        name: "FIRHAN MAULANA",
        birth_place: "GROBOGAN",
        birth_date: "02-09-1979",
        gender: "LAKI-LAKI",
        blood_type: "O",
        street: "PRM PURI DOMAS",
        rt_rw: "001/024",
        village: "WEDOMARTANI",
        district: "NGEMPLAK",
        religion: "ISLAM",
        marital: "KAWIN",
        occupation: "PEDAGANG",
        expiry: "SEUMUR HIDUP",
        issue_place: "SLEMAN",
        issue_date: "05-06-2012",
        misreads: &[
            ("village", "WEDOMARTANI", "WEDOMARTANI!"),
            ("gender", "O", "0"),
            ("birth", "GROBOGAN,", "GROBOGAN."),
        ],
    },
    CardSpec {
        card_id: "card02",
        capture_kind: Camera,
        province: "JAWA TENGAH",
        city: "KOTA SEMARANG",
        nik: "3374054107880002",
        name: "SITI AMINAH",
        birth_place: "SEMARANG",
        birth_date: "01-07-1988",
        gender: "PEREMPUAN",
        blood_type: "A",
        street: "JL PEMUDA NO 12",
        rt_rw: "003/005",
        village: "SEKAYU",
        district: "SEMARANG TENGAH",
        religion: "ISLAM",
        marital: "BELUM KAWIN",
        occupation: "KARYAWAN SWASTA",
        expiry: "SEUMUR HIDUP",
        issue_place: "SEMARANG",
        issue_date: "14-02-2015",
        misreads: &[
            ("nik", "3374054107880002", "3374O541O788OOO2"),
            ("name", "Nama", "Narna"),
            ("religion", "ISLAM", "1SLAM"),
            ("marital", "KAWIN", "KAWlN"),
        ],
    },
    CardSpec {
        card_id: "card03",
        capture_kind: Scanner,
        province: "JAWA TIMUR",
        city: "KOTA SURABAYA",
        nik: "3578012505900003",
        name: "BUDI SANTOSO",
        birth_place: "SURABAYA",
        birth_date: "25-05-1990",
        gender: "LAKI-LAKI",
        blood_type: "B",
        street: "JL DARMO PERMAI 7",
        rt_rw: "002/011",
        village: "DUKUH PAKIS",
        district: "DUKUH PAKIS",
        religion: "KRISTEN",
        marital: "KAWIN",
        occupation: "WIRASWASTA",
        expiry: "SEUMUR HIDUP",
        issue_place: "SURABAYA",
        issue_date: "10-03-2016",
        misreads: &[
            ("religion", "Agama", "Agarna"),
            ("occupation", "WIRASWASTA", "WIRASWASTA|"),
        ],
    },
    CardSpec {
        card_id: "card04",
        capture_kind: Camera,
        province: "JAWA BARAT",
        city: "KOTA BANDUNG",
        nik: "3273156812920004",
        name: "DEWI LESTARI",
        birth_place: "BANDUNG",
        birth_date: "28-12-1992",
        gender: "PEREMPUAN",
        blood_type: "AB",
        street: "JL DAGO 45",
        rt_rw: "004/002",
        village: "LEBAKGEDE",
        district: "COBLONG",
        religion: "KATOLIK",
        marital: "BELUM KAWIN",
        occupation: "MAHASISWA",
        expiry: "28-12-2022",
        issue_place: "BANDUNG",
        issue_date: "03-01-2017",
        misreads: &[
            ("nik", "3273156812920004", "32731568I2920004"),
            ("district", "Kecamatan", "Kecarnatan"),
        ],
    },
    CardSpec {
        card_id: "card05",
        capture_kind: Scanner,
        province: "DKI JAKARTA",
        city: "KOTA JAKARTA SELATAN",
        nik: "3174090304850005",
        name: "ANDI WIJAYA",
        birth_place: "JAKARTA",
        birth_date: "03-04-1985",
        gender: "LAKI-LAKI",
        blood_type: "O",
        street: "JL KEMANG RAYA 8",
        rt_rw: "005/003",
        village: "BANGKA",
        district: "MAMPANG PRAPATAN",
        religion: "BUDDHA",
        marital: "KAWIN",
        occupation: "PEGAWAI NEGERI",
        expiry: "SEUMUR HIDUP",
        issue_place: "JAKARTA SELATAN",
        issue_date: "21-08-2018",
        misreads: &[("birth", "03-04-1985", "O3-04-1985"), ("expiry", "HIDUP", "HlDUP")],
    },
    CardSpec {
        card_id: "card06",
        capture_kind: Camera,
        province: "SUMATERA UTARA",
        city: "KOTA MEDAN",
        nik: "1271034509870006",
        name: "RINA SARI",
        birth_place: "MEDAN",
        birth_date: "05-09-1987",
        gender: "PEREMPUAN",
        blood_type: "B",
        street: "JL GATOT SUBROTO 21",
        rt_rw: "001/007",
        village: "SEI SIKAMBING",
        district: "MEDAN SUNGGAL",
        religion: "ISLAM",
        marital: "CERAI HIDUP",
        occupation: "GURU",
        expiry: "SEUMUR HIDUP",
        issue_place: "MEDAN",
        issue_date: "17-11-2019",
        misreads: &[("issued", "*", ""), ("occupation", "GURU", "GURU!")],
    },
    CardSpec {
        card_id: "card07",
        capture_kind: Scanner,
        province: "BALI",
        city: "KABUPATEN BADUNG",
        nik: "5103021708800007",
        name: "I MADE SUARDANA",
        birth_place: "BADUNG",
        birth_date: "17-08-1980",
        gender: "LAKI-LAKI",
        blood_type: "A",
        street: "JL RAYA KUTA 99",
        rt_rw: "000/000",
        village: "KUTA",
        district: "KUTA",
        religion: "HINDU",
        marital: "KAWIN",
        occupation: "PEDAGANG",
        expiry: "SEUMUR HIDUP",
        issue_place: "BADUNG",
        issue_date: "09-09-2013",
        misreads: &[
            ("nik", "5103021708800007", "5lO3O21?O8BOo007"),
            ("occupation", "PEDAGANG", "PEDACANG"),
        ],
    },
    CardSpec {
        card_id: "card08",
        capture_kind: Camera,
        province: "JAWA TENGAH",
        city: "KABUPATEN GROBOGAN",
        nik: "3315104406950008",
        name: "NUR AINI",
        birth_place: "GROBOGAN",
        birth_date: "04-06-1995",
        gender: "PEREMPUAN",
        blood_type: "O",
        street: "DUSUN KRAJAN",
        rt_rw: "002/004",
        village: "KUNDEN",
        district: "WIROSARI",
        religion: "ISLAM",
        marital: "BELUM KAWIN",
        occupation: "PELAJAR",
        expiry: "SEUMUR HIDUP",
        issue_place: "GROBOGAN",
        issue_date: "22-07-2014",
        misreads: &[("name", "AINI", "A1NI"), ("gender", "O", "0")],
    },
    CardSpec {
        card_id: "card09",
        capture_kind: Scanner,
        province: "KALIMANTAN TIMUR",
        city: "KOTA SAMARINDA",
        nik: "6472031210830009",
        name: "YUSUF HIDAYAT",
        birth_place: "SAMARINDA",
        birth_date: "12-10-1983",
        gender: "LAKI-LAKI",
        blood_type: "AB",
        street: "JL PAHLAWAN 3",
        rt_rw: "006/001",
        village: "SIDODADI",
        district: "SAMARINDA ULU",
        religion: "ISLAM",
        marital: "CERAI MATI",
        occupation: "PETANI",
        expiry: "SEUMUR HIDUP",
        issue_place: "SAMARINDA",
        issue_date: "30-01-2012",
        misreads: &[("marital", "MATI", "MATl"), ("rtrw", "006/001", "OO6/OO1")],
    },
    CardSpec {
        card_id: "card10",
        capture_kind: Camera,
        province: "SULAWESI SELATAN",
        city: "KOTA MAKASSAR",
        nik: "7371115002910010",
        name: "ANDI NURHALIZA",
        birth_place: "MAKASSAR",
        birth_date: "10-02-1991",
        gender: "PEREMPUAN",
        blood_type: "A",
        street: "JL SOMBA OPU 15",
        rt_rw: "003/002",
        village: "LOSARI",
        district: "UJUNG PANDANG",
        religion: "ISLAM",
        marital: "KAWIN",
        occupation: "DOKTER",
        expiry: "SEUMUR HIDUP",
        issue_place: "MAKASSAR",
        issue_date: "11-04-2020",
        misreads: &[
            ("nik", "7371115002910010", "737lll5OO29lOOlO"),
            ("religion", "Agama", "Agarna"),
            ("religion", "ISLAM", "1SLAM"),
            ("occupation", "DOKTER", "DOKTER!"),
        ],
    },
];

#[cfg(test)]
mod tests {
    use super::*;
    use crate::postproc::chars_to_digits;

    #[test]
    fn generation_is_deterministic() {
        let a = fixture_cards().unwrap();
        let b = fixture_cards().unwrap();
        for (x, y) in a.iter().zip(&b) {
            assert_eq!(x.png, y.png);
            assert_eq!(x.dump, y.dump);
        }
    }

    #[test]
    fn repairable_nik_misreads_map_back() {
        for spec in &CARDS {
            for (tag, printed, read) in spec.misreads {
                if *tag == "nik"
                    && read
                        .chars()
                        .all(|c| c.is_ascii_digit() || crate::postproc::DigitMap::default().get(c).is_some())
                {
                    assert_eq!(chars_to_digits(read), *printed, "{}", spec.card_id);
                }
            }
        }
    }

    #[test]
    fn every_misread_hits_a_printed_word() {
        for (i, spec) in CARDS.iter().enumerate() {
            let placed = layout(spec);
            for (tag, printed, _) in spec.misreads {
                if *printed == "*" {
                    assert!(placed.iter().any(|p| p.read.is_empty()));
                    continue;
                }
                assert!(
                    placed.iter().any(|p| p.printed == *printed && p.read != p.printed),
                    "card {i}: {tag}/{printed}"
                );
            }
        }
    }
}
