package com.acme.editor;

import com.acme.editor.io.FileStore;
import javax.swing.JDialog;

public class PrefsActions {
    private final JDialog dialog;

    public PrefsActions(JDialog dialog) {
        this.dialog = dialog;
    }

    public void apply() {
        FileStore.write("wrap=true");
        dialog.dispose();
    }
}
