"""Hand-oracled wikitext anchor cases: (markup, [(target, anchor), ...]).

Expected lists were worked out by hand against the documented link
semantics (last-pipe anchors, fragment stripping, media/category
exclusion with colon escape, nested caption links, abandoned outers).
"""

CASES = [
    # bare and piped basics
    ("[[Barack Obama]]", [("Barack Obama", "Barack Obama")]),
    ("see [[Barack Obama|Obama]] won", [("Barack Obama", "Obama")]),
    ("[[A]]", [("A", "A")]),
    ("[[A|x]] mid [[B|y]]", [("A", "x"), ("B", "y")]),
    ("[[A]][[B]]", [("A", "A"), ("B", "B")]),
    ("no links here", []),
    ("", []),
    # normalization
    ("[[barack obama]]", [("Barack obama", "Barack obama")]),
    ("[[Barack_Obama]]", [("Barack Obama", "Barack Obama")]),
    ("[[ Barack Obama ]]", [("Barack Obama", "Barack Obama")]),
    ("[[Barack  Obama]]", [("Barack Obama", "Barack Obama")]),
    ("[[ A_b ]]", [("A b", "A b")]),
    ("[[école]]", [("École", "École")]),
    ("[[Å pagé|ünïcode]]", [("Å pagé", "ünïcode")]),
    # pipes
    ("[[Barack Obama|]]", [("Barack Obama", "Barack Obama")]),
    ("[[Barack Obama|the|president]]", [("Barack Obama", "president")]),
    ("[[A|b c d]]", [("A", "b c d")]),
    ("[[A|''italic'']]", [("A", "''italic''")]),
    ("[[A|x#y]]", [("A", "x#y")]),
    # fragments
    ("[[Euro 2012#Final|the final]]", [("Euro 2012", "the final")]),
    ("[[Euro 2012#Final]]", [("Euro 2012", "Euro 2012")]),
    ("[[A#B#C|x]]", [("A", "x")]),
    ("[[#Section]]", []),
    ("[[#Section|here]]", []),
    # media and category exclusion
    ("[[File:x.png]]", []),
    ("[[file:x.png]]", []),
    ("[[FILE:x.png|thumb]]", []),
    ("[[Image:photo.jpg|thumb|caption]]", []),
    ("[[Category:Sprinters]]", []),
    ("[[Category:Sprinters|sort key]]", []),
    ("[[Euro 2012#Final|the final]] and [[File:x.png|thumb]]",
     [("Euro 2012", "the final")]),
    ("x [[A]] y [[File:f.png]] z [[B]]", [("A", "A"), ("B", "B")]),
    # colon escape: a visible link to the category/file page
    ("[[:Category:Sprinters]]", [("Category:Sprinters", "Category:Sprinters")]),
    ("[[:Category:Sprinters|cat]]", [("Category:Sprinters", "cat")]),
    # nested caption links count; the media link itself does not
    ("[[File:Pic.png|thumb|See [[Usain Bolt]] racing]]",
     [("Usain Bolt", "Usain Bolt")]),
    ("before [[File:a.png|x|See [[B|inner]] and [[C]]]] after [[D]]",
     [("B", "inner"), ("C", "C"), ("D", "D")]),
    # malformed markup never fails, it just yields fewer links
    ("[[unclosed", []),
    ("text [[A]] then [[unclosed", [("A", "A")]),
    ("]] stray closer [[B]]", [("B", "B")]),
    ("[[a [[B]] c]]", [("B", "B")]),
    ("[[A|b [[C]] d]]", [("C", "C")]),
    ("[[|anchor only]]", []),
    ("[[ ]]", []),
    ("[[Multi\nline]]", []),
    ("[[A|multi\nline anchor]]", [("A", "multi\nline anchor")]),
    # comments hide links; templates do not
    ("<!-- [[Hidden]] -->[[Visible]]", [("Visible", "Visible")]),
    ("{{Infobox|link=[[Boxed]]}} and [[Free]]",
     [("Boxed", "Boxed"), ("Free", "Free")]),
    # duplicates keep their own positions
    ("[[A]] [[A]]", [("A", "A"), ("A", "A")]),
]
