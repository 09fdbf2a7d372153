//! The classic Porter (1980) suffix-stripping algorithm, all five steps.
//!
//! Any character outside a/e/i/o/u that is not a `y` preceded by a consonant
//! counts as a consonant, so digits and non-ASCII letters pass through the
//! rules unharmed. There is no minimum word length; the rules alone decide.

fn is_cons(w: &[char], i: usize) -> bool {
    match w[i] {
        'a' | 'e' | 'i' | 'o' | 'u' => false,
        'y' => i == 0 || !is_cons(w, i - 1),
        _ => true,
    }
}

/// The measure m of a stem, counting vowel-consonant sequences: [C](VC)^m[V].
fn measure(w: &[char]) -> usize {
    let n = w.len();
    let mut m = 0;
    let mut i = 0;
    while i < n && is_cons(w, i) {
        i += 1;
    }
    while i < n {
        while i < n && !is_cons(w, i) {
            i += 1;
        }
        if i >= n {
            break;
        }
        while i < n && is_cons(w, i) {
            i += 1;
        }
        m += 1;
    }
    m
}

fn contains_vowel(w: &[char]) -> bool {
    (0..w.len()).any(|i| !is_cons(w, i))
}

fn ends_double_cons(w: &[char]) -> bool {
    let n = w.len();
    n >= 2 && w[n - 1] == w[n - 2] && is_cons(w, n - 1)
}

/// *o: stem ends consonant-vowel-consonant where the final consonant is not
/// w, x or y.
fn ends_cvc(w: &[char]) -> bool {
    let n = w.len();
    if n < 3 || !is_cons(w, n - 3) || is_cons(w, n - 2) || !is_cons(w, n - 1) {
        return false;
    }
    !matches!(w[n - 1], 'w' | 'x' | 'y')
}

fn ends_with(w: &[char], suffix: &str) -> bool {
    let s: Vec<char> = suffix.chars().collect();
    w.len() >= s.len() && w[w.len() - s.len()..] == s[..]
}

fn replace(w: &mut Vec<char>, suffix_len: usize, replacement: &str) {
    let keep = w.len() - suffix_len;
    w.truncate(keep);
    w.extend(replacement.chars());
}

fn step1a(w: &mut Vec<char>) {
    if ends_with(w, "sses") {
        replace(w, 4, "ss");
    } else if ends_with(w, "ies") {
        replace(w, 3, "i");
    } else if ends_with(w, "ss") {
        // unchanged
    } else if ends_with(w, "s") {
        replace(w, 1, "");
    }
}

fn step1b(w: &mut Vec<char>) {
    if ends_with(w, "eed") {
        if measure(&w[..w.len() - 3]) > 0 {
            replace(w, 3, "ee");
        }
        return;
    }
    let stem_len = if ends_with(w, "ed") {
        w.len() - 2
    } else if ends_with(w, "ing") {
        w.len() - 3
    } else {
        return;
    };
    if !contains_vowel(&w[..stem_len]) {
        return;
    }
    w.truncate(stem_len);
    if ends_with(w, "at") || ends_with(w, "bl") || ends_with(w, "iz") {
        w.push('e');
    } else if ends_double_cons(w) && !matches!(w[w.len() - 1], 'l' | 's' | 'z') {
        w.pop();
    } else if measure(w) == 1 && ends_cvc(w) {
        w.push('e');
    }
}

fn step1c(w: &mut Vec<char>) {
    if ends_with(w, "y") && contains_vowel(&w[..w.len() - 1]) {
        replace(w, 1, "i");
    }
}

const STEP2: &[(&str, &str)] = &[
    ("ational", "ate"),
    ("tional", "tion"),
    ("enci", "ence"),
    ("anci", "ance"),
    ("izer", "ize"),
    ("abli", "able"),
    ("alli", "al"),
    ("entli", "ent"),
    ("eli", "e"),
    ("ousli", "ous"),
    ("ization", "ize"),
    ("ation", "ate"),
    ("ator", "ate"),
    ("alism", "al"),
    ("iveness", "ive"),
    ("fulness", "ful"),
    ("ousness", "ous"),
    ("aliti", "al"),
    ("iviti", "ive"),
    ("biliti", "ble"),
];

const STEP3: &[(&str, &str)] = &[
    ("icate", "ic"),
    ("ative", ""),
    ("alize", "al"),
    ("iciti", "ic"),
    ("ical", "ic"),
    ("ful", ""),
    ("ness", ""),
];

const STEP4: &[&str] = &[
    "al", "ance", "ence", "er", "ic", "able", "ible", "ant", "ement", "ment",
    "ent", "ion", "ou", "ism", "ate", "iti", "ous", "ive", "ize",
];

/// Longest matching suffix wins; if its measure condition fails, the step
/// does nothing even when a shorter suffix would have matched.
fn apply_table(w: &mut Vec<char>, table: &[(&str, &str)]) {
    let mut best: Option<(&str, &str)> = None;
    for &(suf, rep) in table {
        if ends_with(w, suf) && best.map_or(true, |(b, _)| suf.len() > b.len()) {
            best = Some((suf, rep));
        }
    }
    if let Some((suf, rep)) = best {
        let suffix_len = suf.chars().count();
        if measure(&w[..w.len() - suffix_len]) > 0 {
            replace(w, suffix_len, rep);
        }
    }
}

fn step4(w: &mut Vec<char>) {
    let mut best: Option<&str> = None;
    for &suf in STEP4 {
        if ends_with(w, suf) && best.map_or(true, |b| suf.len() > b.len()) {
            best = Some(suf);
        }
    }
    let Some(suf) = best else { return };
    let stem_len = w.len() - suf.len();
    if suf == "ion" && !(stem_len > 0 && matches!(w[stem_len - 1], 's' | 't')) {
        return;
    }
    if measure(&w[..stem_len]) > 1 {
        w.truncate(stem_len);
    }
}

fn step5a(w: &mut Vec<char>) {
    if ends_with(w, "e") {
        let stem = &w[..w.len() - 1];
        let m = measure(stem);
        if m > 1 || (m == 1 && !ends_cvc(stem)) {
            w.pop();
        }
    }
}

fn step5b(w: &mut Vec<char>) {
    if measure(w) > 1 && ends_double_cons(w) && w[w.len() - 1] == 'l' {
        w.pop();
    }
}

/// Stem one lowercase token.
pub fn stem(token: &str) -> String {
    let mut w: Vec<char> = token.chars().collect();
    if w.is_empty() {
        return String::new();
    }
    step1a(&mut w);
    if !w.is_empty() {
        step1b(&mut w);
    }
    if !w.is_empty() {
        step1c(&mut w);
        apply_table(&mut w, STEP2);
        apply_table(&mut w, STEP3);
        step4(&mut w);
        step5a(&mut w);
        step5b(&mut w);
    }
    w.into_iter().collect()
}
