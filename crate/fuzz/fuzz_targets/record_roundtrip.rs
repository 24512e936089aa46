#![no_main]

use affcorr::CorrespondenceRecord;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    let Ok(rec) = CorrespondenceRecord::parse_line(text) else {
        return;
    };
    let line = rec.to_line();
    assert!(!line.contains('\n'), "serialized record spans lines: {line}");
    let back = CorrespondenceRecord::parse_line(&line).expect("serialized record parses");
    assert_eq!(back, rec);
    assert_eq!(back.to_line(), line);
});
